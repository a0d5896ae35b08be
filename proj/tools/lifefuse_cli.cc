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

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lifefuse/data.h"
#include "lifefuse/ensemble.h"
#include "lifefuse/error.h"
#include "lifefuse/evalkit.h"
#include "lifefuse/featsel.h"
#include "lifefuse/interpret.h"
#include "lifefuse/learner.h"
#include "lifefuse/parallel.h"
#include "lifefuse/pipeline.h"
#include "lifefuse/random.h"
#include "lifefuse/tune.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace lifefuse {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

int ExitCodeFor(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kConfig:
      return kExitConfig;
    case ErrorCategory::kData:
      return kExitData;
    case ErrorCategory::kNumerical:
      return kExitNumerical;
  }
  return kExitNumerical;
}

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 1;
};

struct DataOptions {
  std::string csv;
  std::string mapping;
};

json ReadJsonFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kInvalidConfig, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kInvalidConfig,
         path.string() + " is not valid JSON: " + e.what());
  }
}

void WriteFile(const fs::path& path,
               const std::function<void(std::ostream&)>& write) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIoError, "cannot write " + path.string());
  write(out);
  out.flush();
  if (!out) Fail(ErrorCode::kIoError, "failed writing " + path.string());
}

void WriteJson(const fs::path& path, const json& j) {
  WriteFile(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> items;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

class Runner {
 public:
  explicit Runner(const GlobalOptions& g) : global_(g) {}

  RunConfig Config(const DataOptions* data = nullptr) const {
    RunConfig c = global_.config.empty()
                      ? RunConfig::FromJson(json::object())
                      : RunConfig::FromJson(ReadJsonFile(global_.config));
    if (global_.seed) c.SetSeed(*global_.seed);
    if (!global_.out.empty()) c.out = global_.out;
    if (data != nullptr && !data->csv.empty()) {
      c.data.csv = data->csv;
      if (data->mapping.empty()) {
        Fail(ErrorCode::kInvalidConfig, "--data needs --mapping");
      }
    }
    if (data != nullptr && !data->mapping.empty()) {
      c.data.mapping = ColumnMapping::FromJson(ReadJsonFile(data->mapping));
    }
    std::error_code ec;
    fs::create_directories(c.out, ec);
    if (ec || !fs::is_directory(c.out)) {
      Fail(ErrorCode::kInvalidConfig,
           "cannot create output directory " + c.out.string());
    }
    return c;
  }

  static Prepared Load(const RunConfig& c) {
    LoadResult loaded = LoadDataset(c.data);
    if (loaded.dropped > 0) {
      std::cerr << "dropped " << loaded.dropped << " invalid rows\n";
    }
    return Preprocess(loaded.table, c.features);
  }

 private:
  GlobalOptions global_;
};

// ---------------------------------------------------------------------------
// Subcommands

struct SynthOptions {
  std::optional<int> cells;
  std::optional<int> cycles;
  std::optional<double> noise;
  std::string output;
};

int CmdSynth(const Runner& runner, const SynthOptions& o) {
  RunConfig c = runner.Config();
  if (o.cells) c.data.synth.cells = *o.cells;
  if (o.cycles) c.data.synth.cycles_per_cell = *o.cycles;
  if (o.noise) c.data.synth.noise_sigma = *o.noise;
  const SynthDataset synth = SynthGenerate(c.data.synth);
  const fs::path path = o.output.empty() ? c.out / "synth.csv" : fs::path(o.output);
  WriteFile(path, [&](std::ostream& out) { WriteCsv(synth.table, out); });
  std::cout << "wrote " << synth.table.rows() << " rows to " << path.string()
            << '\n';
  return kExitOk;
}

int CmdIngest(const Runner& runner, const DataOptions& d) {
  const RunConfig c = runner.Config(&d);
  const LoadResult loaded = LoadDataset(c.data);
  const DataTable table =
      c.features.standardize ? Standardize(loaded.table) : loaded.table;
  WriteFile(c.out / "table.csv", [&](std::ostream& out) { WriteCsv(table, out); });
  json stats = json::object();
  if (table.normalization()) {
    for (const auto& [source, per_feature] : *table.normalization()) {
      json features = json::object();
      for (std::size_t f = 0; f < per_feature.size(); ++f) {
        features[table.schema()[f]] = {{"mean", per_feature[f].mean},
                                       {"stddev", per_feature[f].stddev}};
      }
      stats[std::string(SourceName(source))] = features;
    }
  }
  WriteJson(c.out / "ingest.json", {{"rows", table.rows()},
                                    {"dropped", loaded.dropped},
                                    {"schema", table.schema()},
                                    {"target", table.target_name()},
                                    {"cells", table.Cells().size()},
                                    {"normalization", stats}});
  std::cout << "ingested " << table.rows() << " rows (" << loaded.dropped
            << " dropped)\n";
  return kExitOk;
}

int CmdCorrelate(const Runner& runner, const DataOptions& d,
                 std::optional<double> threshold) {
  RunConfig c = runner.Config(&d);
  if (threshold) c.features.threshold = *threshold;
  c.features.prune = true;
  const Prepared p = Runner::Load(c);
  WriteFile(c.out / "heatmap.csv",
            [&](std::ostream& out) { WriteHeatmap(p.correlation, out); });
  WriteJson(c.out / "prune.json", PruneToJson(p.prune, c.features.threshold));
  std::cout << "retained:";
  for (const auto& f : p.prune.retained) std::cout << ' ' << f;
  std::cout << '\n';
  return kExitOk;
}

int CmdTrain(const Runner& runner, const DataOptions& d) {
  const RunConfig c = runner.Config(&d);
  const Prepared p = Runner::Load(c);
  const TrainTest split = Split(p.table, c.HoldoutSplit());
  const auto model = c.ensemble.Make();
  model->Fit(split.train);
  const auto* stacked = dynamic_cast<const StackedModel*>(model.get());

  WriteJson(c.out / "model.json", model->ToJson());
  WriteFile(c.out / "weights.csv", [&](std::ostream& out) {
    WriteWeightsCsv(stacked->weights(), out);
  });
  const StackedPrediction pred = StackedPredict(*stacked, split.test);
  const FoldMetrics m = Score(split.test.target(), pred.values);
  std::size_t filled = 0;
  for (bool f : pred.sequence_filled) filled += f ? 1 : 0;
  WriteJson(c.out / "holdout.json",
            {{"label", "held-out test split"},
             {"train_rows", split.train.rows()},
             {"test_rows", split.test.rows()},
             {"test_grouping", GroupingName(c.test_grouping)},
             {"features", model->schema()},
             {"sequence_filled_rows", filled},
             {"mae", m.mae},
             {"rmse", m.rmse},
             {"r2", m.r2}});
  std::cout << "held-out r2 " << m.r2 << ", mae " << m.mae << ", rmse "
            << m.rmse << '\n';
  return kExitOk;
}

int CmdCompare(const Runner& runner, const DataOptions& d,
               const std::string& models) {
  RunConfig c = runner.Config(&d);
  if (!models.empty()) c.roster = SplitList(models);
  if (c.roster.size() < 2) {
    Fail(ErrorCode::kInvalidConfig, "compare needs at least 2 models");
  }
  std::vector<NamedSpec> specs;
  for (const auto& name : c.roster) specs.push_back({name, c.ModelSpec(name)});
  const Prepared p = Runner::Load(c);
  const EvalReport report = CompareModels(specs, p.table, c.FoldSplit());
  const auto improvements = Improvements(report);
  WriteJson(c.out / "compare.json", ReportToJson(report));
  WriteFile(c.out / "compare_folds.csv",
            [&](std::ostream& out) { WriteFoldsCsv(report, out); });
  WriteFile(c.out / "improvements.csv",
            [&](std::ostream& out) { WriteImprovementsCsv(improvements, out); });
  for (const auto& m : report.models) {
    std::cout << m.name << ": r2 " << m.r2.mean << " mae " << m.mae.mean
              << " rmse " << m.rmse.mean << '\n';
  }
  return kExitOk;
}

struct ExplainOptions {
  std::string model;
  std::string pdp;
  int resolution = 20;
  int samples = 200;
  int instances = 50;
  int bins = 20;
  bool verify = false;
};

int CmdExplain(const Runner& runner, const DataOptions& d,
               const ExplainOptions& o) {
  const RunConfig c = runner.Config(&d);
  const fs::path model_path = o.model.empty() ? c.out / "model.json" : fs::path(o.model);
  std::ifstream in(model_path);
  if (!in) Fail(ErrorCode::kIoError, "cannot open model " + model_path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kInvalidConfig, "model file is not valid JSON: " +
                                        std::string(e.what()));
  }
  const auto model = LoadModel(doc);
  const DataTable table = Runner::Load(c).table.SelectFeatures(model->schema());

  const auto bg_rows = SampleBackground(table.rows(), 128, DeriveSeed(c.seed, {1}));
  const auto inst_rows = SampleBackground(
      table.rows(), static_cast<std::size_t>(std::max(o.instances, 1)),
      DeriveSeed(c.seed, {2}));
  ShapMatrix shap = ShapSample(*model, table.Select(inst_rows),
                               table.Select(bg_rows), o.samples,
                               DeriveSeed(c.seed, {3}));
  shap.instances = inst_rows;
  const ImportanceTable importance = Importance(shap);
  WriteFile(c.out / "shap.csv", [&](std::ostream& out) { WriteShapCsv(shap, out); });
  WriteJson(c.out / "shap_summary.json", ShapSummaryJson(shap, importance));
  WriteFile(c.out / "importance.csv",
            [&](std::ostream& out) { WriteImportanceCsv(importance, out); });

  std::vector<std::string> pdp_features = SplitList(o.pdp);
  if (pdp_features.empty()) pdp_features = {importance.entries[0].feature};
  for (const auto& f : pdp_features) {
    if (!table.FeatureIndex(f)) {
      Fail(ErrorCode::kInvalidConfig, "--pdp feature '" + f + "' is not a model feature");
    }
  }
  const PdpGrid grid =
      Pdp(*model, table, pdp_features,
          std::vector<int>(pdp_features.size(), o.resolution));
  WriteFile(c.out / "pdp.csv", [&](std::ostream& out) { WritePdpCsv(grid, out); });

  const DataTable test = Split(table, c.HoldoutSplit()).test;
  const ResidualHist hist =
      MakeResidualHist(test.target(), model->Predict(test), o.bins);
  WriteFile(c.out / "residual.csv",
            [&](std::ostream& out) { WriteResidualCsv(hist, out); });

  const double gap = EfficiencyError(shap);
  for (std::size_t i = 0; i < std::min<std::size_t>(3, importance.entries.size()); ++i) {
    std::cout << importance.entries[i].feature << ' '
              << importance.entries[i].share << '\n';
  }
  if (o.verify && !(gap <= 1e-9)) {
    std::cerr << "lifefuse: efficiency violated, max gap " << gap << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

int CmdTune(const Runner& runner, const DataOptions& d, const std::string& space_path,
            std::optional<int> trials) {
  RunConfig c = runner.Config(&d);
  if (trials) c.trials = *trials;
  json space_doc = c.tune_space;
  if (!space_path.empty()) {
    std::ifstream in(space_path);
    if (!in) Fail(ErrorCode::kInvalidConfig, "cannot open space " + space_path);
    const std::string text((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    try {
      space_doc = json::parse(text);
    } catch (const json::exception& e) {
      Fail(ErrorCode::kInvalidConfig, "search space file is empty or invalid");
    }
  }
  if (space_doc.is_null()) Fail(ErrorCode::kInvalidConfig, "no search space given");
  if (c.trials < 1) Fail(ErrorCode::kInvalidConfig, "trials must be >= 1");
  const SearchSpace space = SearchSpace::FromJson(space_doc);
  const Prepared p = Runner::Load(c);
  const SearchResult result =
      RandomSearch(space, p.table, c.FoldSplit(), c.trials, c.seed);
  WriteFile(c.out / "trials.csv",
            [&](std::ostream& out) { WriteTrialsCsv(result.trials, out); });
  WriteJson(c.out / "best.json", BestToJson(space, result.best));
  std::cout << "best trial " << result.best.index << " objective "
            << result.best.objective << '\n';
  return kExitOk;
}

void AddDataOptions(CLI::App* cmd, DataOptions& d) {
  cmd->add_option("--data", d.csv, "CSV file to load instead of synthetic data");
  cmd->add_option("--mapping", d.mapping, "JSON column mapping for --data");
}

int Main(int argc, char** argv) {
  CLI::App app{"Battery capacity regression with a stacked ensemble"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--config", g.config, "JSON run configuration");
  app.add_option("--seed", g.seed, "global seed");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);

  SynthOptions synth;
  auto* cmd_synth = app.add_subcommand("synth", "generate a synthetic dataset");
  cmd_synth->add_option("--cells", synth.cells, "number of cells");
  cmd_synth->add_option("--cycles", synth.cycles, "cycles per cell");
  cmd_synth->add_option("--noise", synth.noise, "capacity noise sigma, Ah");
  cmd_synth->add_option("-o,--output", synth.output, "CSV path (default <out>/synth.csv)");

  DataOptions data;
  auto* cmd_ingest = app.add_subcommand("ingest", "load, validate, standardize");
  AddDataOptions(cmd_ingest, data);

  std::optional<double> threshold;
  auto* cmd_correlate = app.add_subcommand("correlate", "correlation heatmap and pruning");
  AddDataOptions(cmd_correlate, data);
  cmd_correlate->add_option("--threshold,--collinear-threshold", threshold,
                           "drop one of each pair with |r| at or above this");

  auto* cmd_train = app.add_subcommand("train", "fit the stacked ensemble");
  AddDataOptions(cmd_train, data);

  std::string models;
  auto* cmd_compare = app.add_subcommand("compare", "cross-validated model comparison");
  AddDataOptions(cmd_compare, data);
  cmd_compare->add_option("--models", models, "comma-separated roster");

  ExplainOptions explain;
  auto* cmd_explain = app.add_subcommand("explain", "Shapley, PDP and residual outputs");
  AddDataOptions(cmd_explain, data);
  cmd_explain->add_option("--model", explain.model, "model document (default <out>/model.json)");
  cmd_explain->add_option("--pdp", explain.pdp, "one or two comma-separated features");
  cmd_explain->add_option("--resolution", explain.resolution, "grid points per PDP axis")->check(CLI::Range(2, 10000));
  cmd_explain->add_option("--samples", explain.samples, "permutations per instance")->check(CLI::PositiveNumber);
  cmd_explain->add_option("--instances", explain.instances, "rows to explain")->check(CLI::PositiveNumber);
  cmd_explain->add_option("--bins", explain.bins, "residual histogram bins per axis")->check(CLI::PositiveNumber);
  cmd_explain->add_flag("--verify", explain.verify, "exit 4 unless attributions sum to the output");

  std::string space;
  std::optional<int> trials;
  auto* cmd_tune = app.add_subcommand("tune", "seeded random hyperparameter search");
  AddDataOptions(cmd_tune, data);
  cmd_tune->add_option("--space", space, "JSON search space");
  cmd_tune->add_option("--trials", trials, "number of sampled configurations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    SetNumThreads(g.threads);
    const Runner runner(g);
    if (*cmd_synth) return CmdSynth(runner, synth);
    if (*cmd_ingest) return CmdIngest(runner, data);
    if (*cmd_correlate) return CmdCorrelate(runner, data, threshold);
    if (*cmd_train) return CmdTrain(runner, data);
    if (*cmd_compare) return CmdCompare(runner, data, models);
    if (*cmd_explain) return CmdExplain(runner, data, explain);
    if (*cmd_tune) return CmdTune(runner, data, space, trials);
  } catch (const Error& e) {
    std::cerr << "lifefuse: " << e.what() << '\n';
    return ExitCodeFor(e.category());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "lifefuse: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "lifefuse: internal error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitConfig;
}

}  // namespace
}  // namespace lifefuse

int main(int argc, char** argv) { return lifefuse::Main(argc, argv); }
