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

#include "lifefuse/pipeline.h"

#include <fstream>
#include <variant>

#include "lifefuse/error.h"

namespace lifefuse {

using nlohmann::json;

namespace {

void Require(bool ok, const std::string& what) {
  if (!ok) Fail(ErrorCode::kInvalidConfig, what);
}

Grouping ReadGrouping(const json& j, const char* key, Grouping fallback) {
  if (!j.contains(key)) return fallback;
  const auto g = ParseGrouping(j.at(key).get<std::string>());
  Require(g.has_value(), std::string(key) + " must be 'row' or 'cell'");
  return *g;
}

}  // namespace

std::vector<NamedSpec> DefaultBaselines() {
  return {{"ridge", LearnerSpec(RidgeParams{})},
          {"gbt", LearnerSpec(GbtParams{})},
          {"lstm", LearnerSpec(LstmParams{})},
          {"knn", LearnerSpec(KnnParams{})},
          {"rf", LearnerSpec(ForestParams{})},
          {"mlp", LearnerSpec(MlpParams{})}};
}

std::vector<std::string> DefaultRoster() {
  return {"se", "ridge", "gbt", "lstm", "knn", "rf", "mlp"};
}

RunConfig RunConfig::FromJson(const json& j) {
  try {
    Require(j.is_object(), "run config must be a JSON object");
    RunConfig c;
    c.baselines = DefaultBaselines();
    c.roster = DefaultRoster();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out")) c.out = j.at("out").get<std::string>();

    c.data.synth.seed = c.seed;
    if (j.contains("data")) {
      const json& d = j.at("data");
      const bool has_csv = d.contains("csv");
      const bool has_synth = d.contains("synth");
      Require(has_csv != has_synth,
              "data must name exactly one source: 'csv' or 'synth'");
      if (has_csv) {
        c.data.csv = d.at("csv").get<std::string>();
        Require(d.contains("mapping"), "csv data needs a 'mapping'");
        c.data.mapping = ColumnMapping::FromJson(d.at("mapping"));
      } else {
        json synth = d.at("synth");
        if (!synth.contains("seed")) synth["seed"] = c.seed;
        c.data.synth = SynthConfig::FromJson(synth);
      }
    }

    if (j.contains("split")) {
      const json& s = j.at("split");
      if (s.contains("test_fraction")) {
        c.test_fraction = s.at("test_fraction").get<double>();
      }
      if (s.contains("folds")) c.folds = s.at("folds").get<int>();
      c.test_grouping = ReadGrouping(s, "test_grouping", c.test_grouping);
      c.fold_grouping = ReadGrouping(s, "fold_grouping", c.fold_grouping);
      Require(c.test_fraction > 0.0 && c.test_fraction < 1.0,
              "split.test_fraction must lie in (0, 1)");
      Require(c.folds >= 2, "split.folds must be >= 2");
    }

    if (j.contains("features")) {
      const json& f = j.at("features");
      c.features.standardize = f.value("standardize", c.features.standardize);
      c.features.prune = f.value("prune", c.features.prune);
      c.features.threshold = f.value("threshold", c.features.threshold);
      Require(c.features.threshold > 0.0 && c.features.threshold <= 1.0,
              "features.threshold must lie in (0, 1]");
    }

    json ensemble = j.value("ensemble", json::object());
    if (!ensemble.contains("seed")) ensemble["seed"] = c.seed;
    c.ensemble = LearnerSpec::FromJson({{"kind", "stacked"}, {"params", ensemble}});

    if (j.contains("baselines")) {
      for (const auto& [name, spec] : j.at("baselines").items()) {
        LearnerSpec parsed = LearnerSpec::FromJson(spec);
        bool replaced = false;
        for (auto& b : c.baselines) {
          if (b.name == name) {
            b.spec = parsed;
            replaced = true;
          }
        }
        if (!replaced) c.baselines.push_back({name, parsed});
      }
    }
    if (j.contains("models")) {
      c.roster = j.at("models").get<std::vector<std::string>>();
      Require(!c.roster.empty(), "models must not be empty");
      for (const auto& name : c.roster) c.ModelSpec(name);
    }

    if (j.contains("tune")) {
      const json& t = j.at("tune");
      if (t.contains("space")) c.tune_space = t.at("space");
      c.trials = t.value("trials", c.trials);
      Require(c.trials >= 1, "tune.trials must be >= 1");
    }
    return c;
  } catch (const json::exception& e) {
    Fail(ErrorCode::kInvalidConfig, std::string("run config: ") + e.what());
  }
}

RunConfig RunConfig::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kInvalidConfig, "cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    Fail(ErrorCode::kInvalidConfig,
         "config " + path.string() + " is not valid JSON: " + e.what());
  }
  return FromJson(j);
}

void RunConfig::SetSeed(std::uint64_t s) {
  seed = s;
  data.synth.seed = s;
  ensemble = ensemble.WithSeed(s);
}

SplitSpec RunConfig::HoldoutSplit() const {
  SplitSpec s;
  s.test_fraction = test_fraction;
  s.fold_count = folds;
  s.seed = seed;
  s.grouping = test_grouping;
  return s;
}

SplitSpec RunConfig::FoldSplit() const {
  SplitSpec s = HoldoutSplit();
  s.grouping = fold_grouping;
  return s;
}

LearnerSpec RunConfig::ModelSpec(const std::string& name) const {
  if (name == "se" || name == "stacked") return ensemble;
  for (const auto& b : baselines) {
    if (b.name == name) return b.spec;
  }
  Fail(ErrorCode::kInvalidConfig, "unknown model '" + name + "'");
}

LoadResult LoadDataset(const DataSource& source) {
  if (source.csv) return LoadCsv(*source.csv, source.mapping);
  SynthDataset synth = SynthGenerate(source.synth);
  return {std::move(synth.table), 0};
}

Prepared Preprocess(const DataTable& raw, const FeatureSettings& settings) {
  DataTable table = settings.standardize ? Standardize(raw) : raw;
  CorrelationReport correlation = CorrelationMatrix(table);
  PruneResult prune;
  if (settings.prune) {
    prune = PruneMulticollinear(correlation, settings.threshold);
    table = table.SelectFeatures(prune.retained);
  } else {
    prune.retained = table.schema();
  }
  return {std::move(table), std::move(correlation), std::move(prune)};
}

}  // namespace lifefuse
