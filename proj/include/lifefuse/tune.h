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

#ifndef LIFEFUSE_TUNE_H_
#define LIFEFUSE_TUNE_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lifefuse/data.h"
#include "lifefuse/evalkit.h"
#include "lifefuse/random.h"

namespace lifefuse {

struct ParamRange {
  enum class Kind { kInt, kReal, kChoice };
  std::string name;
  Kind kind = Kind::kReal;
  double low = 0.0;
  double high = 0.0;
  bool log = false;
  std::vector<nlohmann::json> choices;

  nlohmann::json Sample(Rng& rng) const;
};

// {"family": "gbt", "base": {...fixed params...},
//  "params": {"max_depth": {"type": "int", "low": 2, "high": 6},
//             "learning_rate": {"type": "real", "low": 0.01, "high": 0.3},
//             "hidden": {"type": "choice", "values": [[16], [32, 16]]}}}
// Real ranges default to log scale when low > 0 and high / low >= 100; an
// explicit "log" overrides that.
struct SearchSpace {
  std::string family;
  nlohmann::json base = nlohmann::json::object();
  std::vector<ParamRange> params;  // in name order

  static SearchSpace FromJson(const nlohmann::json& j);
  // Base params overlaid with one draw per range.
  nlohmann::json Sample(Rng& rng) const;
};

struct TrialRecord {
  int index = 0;
  std::uint64_t seed = 0;
  nlohmann::json config;
  double objective = 0.0;  // mean cross-validated R^2
  std::vector<FoldMetrics> folds;
  bool failed = false;
  std::string error;
};

struct SearchResult {
  TrialRecord best;
  std::vector<TrialRecord> trials;
};

// Trial t samples with DeriveSeed(seed, {t}) and is scored by CrossValidate.
// Learner seeds come from the split seed, so trials differ only in their
// sampled configuration. Failed trials are recorded; best is the highest
// objective, ties to the lower index. Throws AllTrialsFailed.
SearchResult RandomSearch(const SearchSpace& space, const DataTable& table,
                          const SplitSpec& split, int trials,
                          std::uint64_t seed);

// trial,params,objective,status
void WriteTrialsCsv(const std::vector<TrialRecord>& trials, std::ostream& out);
nlohmann::json BestToJson(const SearchSpace& space, const TrialRecord& best);

}  // namespace lifefuse

#endif  // LIFEFUSE_TUNE_H_
