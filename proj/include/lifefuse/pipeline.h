/*
 * Copyright 2026 The lifefuse Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LIFEFUSE_PIPELINE_H_
#define LIFEFUSE_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lifefuse/data.h"
#include "lifefuse/evalkit.h"
#include "lifefuse/featsel.h"
#include "lifefuse/learner.h"

namespace lifefuse {

struct DataSource {
  std::optional<std::filesystem::path> csv;  // empty: synthetic
  ColumnMapping mapping;
  SynthConfig synth;
};

struct FeatureSettings {
  bool standardize = true;
  bool prune = true;
  double threshold = 0.95;
};

// One JSON document describing a whole run:
// {"seed": 7, "out": "out",
//  "data": {"synth": {...}} | {"csv": "file.csv", "mapping": {...}},
//  "split": {"test_fraction": 0.25, "test_grouping": "cell",
//            "folds": 5, "fold_grouping": "row"},
//  "features": {"standardize": true, "prune": true, "threshold": 0.95},
//  "ensemble": {stacked params}, "baselines": {"name": {learner spec}},
//  "models": ["se", "ridge", ...], "tune": {"space": {...}, "trials": 20}}
struct RunConfig {
  std::uint64_t seed = 7;
  std::filesystem::path out = "out";
  DataSource data;
  double test_fraction = 0.25;
  Grouping test_grouping = Grouping::kByCell;
  int folds = 5;
  Grouping fold_grouping = Grouping::kByRow;
  FeatureSettings features;
  LearnerSpec ensemble = LearnerSpec(StackedParams{DefaultStackBases()});
  std::vector<NamedSpec> baselines;
  std::vector<std::string> roster;
  nlohmann::json tune_space;  // null when absent
  int trials = 20;

  static RunConfig FromJson(const nlohmann::json& j);
  static RunConfig Load(const std::filesystem::path& path);

  // Replaces the global seed everywhere it is consumed.
  void SetSeed(std::uint64_t seed);

  SplitSpec HoldoutSplit() const;
  SplitSpec FoldSplit() const;
  // Spec for a roster name; "se" is the configured ensemble.
  LearnerSpec ModelSpec(const std::string& name) const;
};

// Baselines compared against the ensemble: ridge, gbt, lstm, knn, rf, mlp.
std::vector<NamedSpec> DefaultBaselines();
std::vector<std::string> DefaultRoster();

LoadResult LoadDataset(const DataSource& source);

struct Prepared {
  DataTable table;
  CorrelationReport correlation;
  PruneResult prune;
};

// Standardize, correlate, then drop multicollinear features.
Prepared Preprocess(const DataTable& raw, const FeatureSettings& settings);

}  // namespace lifefuse

#endif  // LIFEFUSE_PIPELINE_H_
