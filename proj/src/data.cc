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

#include "lifefuse/data.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "lifefuse/csv.h"
#include "lifefuse/error.h"
#include "lifefuse/random.h"

namespace lifefuse {

std::string_view SourceName(Source source) {
  switch (source) {
    case Source::kNasa: return "NASA";
    case Source::kCalce: return "CALCE";
    case Source::kMitTrc: return "MIT_TRC";
    case Source::kNca: return "NCA";
    case Source::kSynthetic: return "SYNTHETIC";
  }
  return "SYNTHETIC";
}

std::optional<Source> ParseSource(std::string_view name) {
  for (Source s : {Source::kNasa, Source::kCalce, Source::kMitTrc, Source::kNca,
                   Source::kSynthetic}) {
    if (SourceName(s) == name) return s;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// DataTable

DataTable::DataTable(Schema schema, std::vector<Source> sources,
                     std::vector<std::string> cell_ids,
                     std::vector<std::uint64_t> cycles, FeatureMatrix features,
                     Eigen::VectorXd target,
                     std::optional<Normalization> normalization,
                     std::string target_name)
    : schema_(std::move(schema)),
      sources_(std::move(sources)),
      cell_ids_(std::move(cell_ids)),
      cycles_(std::move(cycles)),
      features_(std::move(features)),
      target_(std::move(target)),
      normalization_(std::move(normalization)),
      target_name_(std::move(target_name)) {
  const auto n = static_cast<std::size_t>(target_.size());
  if (sources_.size() != n || cell_ids_.size() != n || cycles_.size() != n ||
      static_cast<std::size_t>(features_.rows()) != n) {
    Fail(ErrorCode::kLengthMismatch, "table columns have differing lengths");
  }
  if (static_cast<std::size_t>(features_.cols()) != schema_.size()) {
    Fail(ErrorCode::kSchemaMismatch, "feature width " +
                                         std::to_string(features_.cols()) +
                                         " != schema length " +
                                         std::to_string(schema_.size()));
  }
  std::set<std::string_view> names;
  for (const auto& name : schema_) {
    if (!names.insert(name).second) {
      Fail(ErrorCode::kInvalidArgument, "duplicate feature name " + name);
    }
  }
  if (!features_.allFinite() || !target_.allFinite()) {
    Fail(ErrorCode::kInvalidArgument, "table contains non-finite values");
  }
  if (n > 0 && target_.minCoeff() < 0.0) {
    Fail(ErrorCode::kInvalidArgument, "negative capacity target");
  }
  std::set<std::tuple<Source, std::string_view, std::uint64_t>> keys;
  for (std::size_t i = 0; i < n; ++i) {
    if (!keys.emplace(sources_[i], cell_ids_[i], cycles_[i]).second) {
      Fail(ErrorCode::kDuplicateKey,
           "duplicate key (" + std::string(SourceName(sources_[i])) + ", " +
               cell_ids_[i] + ", " + std::to_string(cycles_[i]) + ")");
    }
  }
  if (normalization_) {
    for (const auto& [source, stats] : *normalization_) {
      if (stats.size() != schema_.size()) {
        Fail(ErrorCode::kSchemaMismatch, "normalization width mismatch");
      }
      for (const auto& s : stats) {
        if (!(s.stddev > 0.0)) {
          Fail(ErrorCode::kDegenerateFeature, "recorded stddev must be > 0");
        }
      }
    }
  }
}

DataTable DataTable::FromRecords(Schema schema,
                                 std::span<const CycleRecord> records,
                                 std::string target_name) {
  const auto n = records.size();
  const auto f = static_cast<Eigen::Index>(schema.size());
  std::vector<Source> sources(n);
  std::vector<std::string> cells(n);
  std::vector<std::uint64_t> cycles(n);
  FeatureMatrix x(static_cast<Eigen::Index>(n), f);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = records[i];
    if (r.features.size() != f) {
      Fail(ErrorCode::kSchemaMismatch,
           "record " + std::to_string(i) + " has " +
               std::to_string(r.features.size()) + " features, schema has " +
               std::to_string(f));
    }
    sources[i] = r.source;
    cells[i] = r.cell_id;
    cycles[i] = r.cycle;
    x.row(static_cast<Eigen::Index>(i)) = r.features.transpose();
    y(static_cast<Eigen::Index>(i)) = r.target;
  }
  return DataTable(std::move(schema), std::move(sources), std::move(cells),
                   std::move(cycles), std::move(x), std::move(y), std::nullopt,
                   std::move(target_name));
}

CycleRecord DataTable::record(std::size_t row) const {
  const auto r = static_cast<Eigen::Index>(row);
  return CycleRecord{sources_.at(row), cell_ids_.at(row), cycles_.at(row),
                     features_.row(r).transpose(), target_(r)};
}

std::optional<std::size_t> DataTable::FeatureIndex(std::string_view name) const {
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    if (schema_[i] == name) return i;
  }
  return std::nullopt;
}

DataTable DataTable::Select(std::span<const std::size_t> rows) const {
  const auto n = static_cast<Eigen::Index>(rows.size());
  std::vector<Source> sources;
  std::vector<std::string> cells;
  std::vector<std::uint64_t> cycles;
  sources.reserve(rows.size());
  cells.reserve(rows.size());
  cycles.reserve(rows.size());
  FeatureMatrix x(n, features_.cols());
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t r = rows[static_cast<std::size_t>(i)];
    if (r >= this->rows()) {
      Fail(ErrorCode::kInvalidArgument, "row index out of range");
    }
    sources.push_back(sources_[r]);
    cells.push_back(cell_ids_[r]);
    cycles.push_back(cycles_[r]);
    x.row(i) = features_.row(static_cast<Eigen::Index>(r));
    y(i) = target_(static_cast<Eigen::Index>(r));
  }
  return DataTable(schema_, std::move(sources), std::move(cells),
                   std::move(cycles), std::move(x), std::move(y),
                   normalization_, target_name_);
}

DataTable DataTable::SelectFeatures(const Schema& names) const {
  std::vector<Eigen::Index> idx;
  idx.reserve(names.size());
  for (const auto& name : names) {
    const auto i = FeatureIndex(name);
    if (!i) Fail(ErrorCode::kMissingColumn, "feature " + name + " not in table");
    idx.push_back(static_cast<Eigen::Index>(*i));
  }
  FeatureMatrix x(features_.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) {
    x.col(static_cast<Eigen::Index>(j)) = features_.col(idx[j]);
  }
  std::optional<Normalization> norm;
  if (normalization_) {
    norm.emplace();
    for (const auto& [source, stats] : *normalization_) {
      auto& out = (*norm)[source];
      for (auto i : idx) out.push_back(stats[static_cast<std::size_t>(i)]);
    }
  }
  return DataTable(names, sources_, cell_ids_, cycles_, std::move(x), target_,
                   std::move(norm), target_name_);
}

DataTable DataTable::WithFeatures(FeatureMatrix features) const {
  return DataTable(schema_, sources_, cell_ids_, cycles_, std::move(features),
                   target_, normalization_, target_name_);
}

std::vector<CellGroup> DataTable::Cells() const {
  std::vector<CellGroup> groups;
  std::map<std::pair<Source, std::string_view>, std::size_t> lookup;
  for (std::size_t i = 0; i < rows(); ++i) {
    const auto key = std::make_pair(sources_[i], std::string_view(cell_ids_[i]));
    auto it = lookup.find(key);
    if (it == lookup.end()) {
      it = lookup.emplace(key, groups.size()).first;
      groups.push_back(CellGroup{sources_[i], cell_ids_[i], {}});
    }
    groups[it->second].rows.push_back(i);
  }
  for (auto& g : groups) {
    std::stable_sort(g.rows.begin(), g.rows.end(),
                     [&](std::size_t a, std::size_t b) {
                       return cycles_[a] < cycles_[b];
                     });
  }
  return groups;
}

// ---------------------------------------------------------------------------
// CSV

ColumnMapping ColumnMapping::FromJson(const nlohmann::json& j) {
  ColumnMapping m;
  try {
    m.target = j.at("target").get<std::string>();
    m.features = j.at("features").get<std::vector<std::string>>();
    m.source = j.value("source", std::string("SYNTHETIC"));
    m.cell_id = j.value("cell_id", std::string());
    m.cycle = j.value("cycle", std::string());
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kInvalidConfig, std::string("column mapping: ") + e.what());
  }
  if (m.features.size() < 2) {
    Fail(ErrorCode::kInvalidConfig, "column mapping needs at least 2 features");
  }
  return m;
}

nlohmann::json ColumnMapping::ToJson() const {
  return nlohmann::json{{"target", target},   {"features", features},
                        {"source", source},   {"cell_id", cell_id},
                        {"cycle", cycle}};
}

ColumnMapping ColumnMapping::ForTable(const DataTable& table) {
  ColumnMapping m;
  m.target = table.target_name();
  m.features = table.schema();
  m.source = "source";
  m.cell_id = "cell_id";
  m.cycle = "cycle";
  return m;
}

LoadResult ParseCsv(std::istream& in, const ColumnMapping& mapping) {
  if (mapping.features.size() < 2) {
    Fail(ErrorCode::kInvalidConfig, "column mapping needs at least 2 features");
  }
  std::string line;
  if (!std::getline(in, line)) Fail(ErrorCode::kEmptyTable, "no header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
    line.erase(0, 3);  // UTF-8 BOM
  }
  const auto header = csv::SplitLine(line);
  std::unordered_map<std::string, std::size_t> columns;
  for (std::size_t i = 0; i < header.size(); ++i) columns.emplace(header[i], i);

  auto require = [&](const std::string& name) {
    const auto it = columns.find(name);
    if (it == columns.end()) {
      Fail(ErrorCode::kMissingColumn, "column '" + name + "' not in header");
    }
    return it->second;
  };
  const std::size_t target_col = require(mapping.target);
  std::vector<std::size_t> feature_cols;
  for (const auto& f : mapping.features) feature_cols.push_back(require(f));
  std::optional<std::size_t> source_col;
  std::optional<Source> literal_source;
  if (columns.count(mapping.source)) {
    source_col = columns.at(mapping.source);
  } else {
    literal_source = ParseSource(mapping.source);
    if (!literal_source) {
      Fail(ErrorCode::kInvalidConfig,
           "source '" + mapping.source + "' is neither a column nor a tag");
    }
  }
  std::optional<std::size_t> cell_col;
  std::optional<std::size_t> cycle_col;
  if (!mapping.cell_id.empty()) cell_col = require(mapping.cell_id);
  if (!mapping.cycle.empty()) cycle_col = require(mapping.cycle);

  std::vector<CycleRecord> records;
  std::size_t dropped = 0;
  std::uint64_t line_index = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const std::uint64_t ordinal = line_index++;
    const auto fields = csv::SplitLine(line);
    auto field = [&](std::size_t col) -> const std::string* {
      return col < fields.size() ? &fields[col] : nullptr;
    };
    CycleRecord rec;
    rec.features.resize(static_cast<Eigen::Index>(feature_cols.size()));
    bool ok = true;
    for (std::size_t j = 0; ok && j < feature_cols.size(); ++j) {
      const auto* text = field(feature_cols[j]);
      const auto v = text ? csv::ParseDouble(*text) : std::nullopt;
      if (v) {
        rec.features(static_cast<Eigen::Index>(j)) = *v;
      } else {
        ok = false;
      }
    }
    if (ok) {
      const auto* text = field(target_col);
      const auto v = text ? csv::ParseDouble(*text) : std::nullopt;
      if (v && *v >= 0.0) {
        rec.target = *v;
      } else {
        ok = false;
      }
    }
    if (ok && source_col) {
      const auto* text = field(*source_col);
      const auto s = text ? ParseSource(*text) : std::nullopt;
      if (s) {
        rec.source = *s;
      } else {
        ok = false;
      }
    } else if (ok) {
      rec.source = *literal_source;
    }
    if (ok && cell_col) {
      const auto* text = field(*cell_col);
      if (text && !text->empty()) {
        rec.cell_id = *text;
      } else {
        ok = false;
      }
    } else if (ok) {
      rec.cell_id = "0";
    }
    if (ok && cycle_col) {
      const auto* text = field(*cycle_col);
      const auto v = text ? csv::ParseDouble(*text) : std::nullopt;
      if (v && *v >= 0.0 && std::floor(*v) == *v) {
        rec.cycle = static_cast<std::uint64_t>(*v);
      } else {
        ok = false;
      }
    } else if (ok) {
      rec.cycle = ordinal;
    }
    if (ok) {
      records.push_back(std::move(rec));
    } else {
      ++dropped;
    }
  }
  if (records.empty()) {
    Fail(ErrorCode::kEmptyTable, "no valid rows (" + std::to_string(dropped) +
                                     " dropped)");
  }
  return LoadResult{DataTable::FromRecords(mapping.features, records,
                                           mapping.target),
                    dropped};
}

LoadResult LoadCsv(const std::filesystem::path& path,
                   const ColumnMapping& mapping) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIoError, "cannot open " + path.string());
  return ParseCsv(in, mapping);
}

void WriteCsv(const DataTable& table, std::ostream& out) {
  out << "source,cell_id,cycle";
  for (const auto& name : table.schema()) out << ',' << csv::Quote(name);
  out << ',' << csv::Quote(table.target_name()) << '\n';
  const auto& x = table.features();
  for (std::size_t i = 0; i < table.rows(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out << SourceName(table.sources()[i]) << ','
        << csv::Quote(table.cell_ids()[i]) << ',' << table.cycles()[i];
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      out << ',' << csv::FormatDouble(x(r, j));
    }
    out << ',' << csv::FormatDouble(table.target()(r)) << '\n';
  }
}

void WriteCsv(const DataTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIoError, "cannot write " + path.string());
  WriteCsv(table, out);
  if (!out) Fail(ErrorCode::kIoError, "write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Standardization

namespace {

Normalization ComputeStats(const DataTable& table) {
  std::map<Source, std::vector<std::size_t>> by_source;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    by_source[table.sources()[i]].push_back(i);
  }
  Normalization stats;
  const auto& x = table.features();
  for (const auto& [source, rows] : by_source) {
    auto& out = stats[source];
    for (std::size_t j = 0; j < table.num_features(); ++j) {
      const auto col = static_cast<Eigen::Index>(j);
      if (rows.size() < 2) {
        Fail(ErrorCode::kDegenerateFeature,
             "feature " + table.schema()[j] + " in source " +
                 std::string(SourceName(source)) + " has fewer than 2 rows");
      }
      double mean = 0.0;
      for (auto r : rows) mean += x(static_cast<Eigen::Index>(r), col);
      mean /= static_cast<double>(rows.size());
      double ss = 0.0;
      for (auto r : rows) {
        const double d = x(static_cast<Eigen::Index>(r), col) - mean;
        ss += d * d;
      }
      const double sd = std::sqrt(ss / static_cast<double>(rows.size() - 1));
      if (!(sd > 0.0)) {
        Fail(ErrorCode::kDegenerateFeature,
             "feature " + table.schema()[j] + " is constant in source " +
                 std::string(SourceName(source)));
      }
      out.push_back({mean, sd});
    }
  }
  return stats;
}

}  // namespace

DataTable Standardize(const DataTable& table) {
  return Standardize(table, table);
}

DataTable Standardize(const DataTable& table, const DataTable& stats_source) {
  if (stats_source.schema() != table.schema()) {
    Fail(ErrorCode::kSchemaMismatch, "statistics table has a different schema");
  }
  const Normalization stats = ComputeStats(stats_source);
  FeatureMatrix x = table.features();
  for (std::size_t i = 0; i < table.rows(); ++i) {
    const auto it = stats.find(table.sources()[i]);
    if (it == stats.end()) {
      Fail(ErrorCode::kInvalidArgument,
           "no statistics for source " +
               std::string(SourceName(table.sources()[i])));
    }
    for (std::size_t j = 0; j < table.num_features(); ++j) {
      auto& v = x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      v = (v - it->second[j].mean) / it->second[j].stddev;
    }
  }
  // Compose with any previous normalization so Unstandardize returns to the
  // original units.
  Normalization recorded;
  for (const auto& [source, s] : stats) {
    auto& out = recorded[source];
    for (std::size_t j = 0; j < s.size(); ++j) {
      FeatureStats st = s[j];
      if (table.normalization() && table.normalization()->count(source)) {
        const auto& prev = table.normalization()->at(source)[j];
        st = {prev.mean + prev.stddev * s[j].mean, prev.stddev * s[j].stddev};
      }
      out.push_back(st);
    }
  }
  return DataTable(table.schema(), table.sources(), table.cell_ids(),
                   table.cycles(), std::move(x), table.target(),
                   std::move(recorded), table.target_name());
}

DataTable Unstandardize(const DataTable& table) {
  if (!table.normalization()) {
    Fail(ErrorCode::kInvalidArgument, "table carries no normalization");
  }
  const auto& stats = *table.normalization();
  FeatureMatrix x = table.features();
  for (std::size_t i = 0; i < table.rows(); ++i) {
    const auto it = stats.find(table.sources()[i]);
    if (it == stats.end()) {
      Fail(ErrorCode::kInvalidArgument, "no statistics for a row's source");
    }
    for (std::size_t j = 0; j < table.num_features(); ++j) {
      auto& v = x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      v = v * it->second[j].stddev + it->second[j].mean;
    }
  }
  return DataTable(table.schema(), table.sources(), table.cell_ids(),
                   table.cycles(), std::move(x), table.target(), std::nullopt,
                   table.target_name());
}

// ---------------------------------------------------------------------------
// Synthetic data

std::vector<ChemistryPreset> DefaultPresets() {
  return {
      {"NCA", 1.85, 0.22, 1.8, 25.0, 0.028, 3.60},
      {"LCO", 1.10, 0.30, 1.4, 24.0, 0.075, 3.70},
      {"LFP", 1.60, 0.15, 2.2, 30.0, 0.018, 3.30},
      {"NCM", 2.00, 0.25, 1.6, 27.0, 0.035, 3.65},
  };
}

SynthConfig SynthConfig::FromJson(const nlohmann::json& j) {
  SynthConfig c;
  try {
    c.cells = j.value("cells", c.cells);
    c.cycles_per_cell = j.value("cycles_per_cell", c.cycles_per_cell);
    c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
    c.feature_noise = j.value("feature_noise", c.feature_noise);
    c.seed = j.value("seed", c.seed);
    if (j.contains("presets")) {
      c.presets.clear();
      for (const auto& p : j.at("presets")) {
        c.presets.push_back({p.at("name").get<std::string>(),
                             p.at("nominal_capacity").get<double>(),
                             p.at("fade_alpha").get<double>(),
                             p.at("fade_beta").get<double>(),
                             p.at("temp_mean").get<double>(),
                             p.at("ir_fresh").get<double>(),
                             p.at("nominal_voltage").get<double>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kInvalidConfig, std::string("synth config: ") + e.what());
  }
  return c;
}

nlohmann::json SynthConfig::ToJson() const {
  nlohmann::json presets_json = nlohmann::json::array();
  for (const auto& p : presets) {
    presets_json.push_back({{"name", p.name},
                            {"nominal_capacity", p.nominal_capacity},
                            {"fade_alpha", p.fade_alpha},
                            {"fade_beta", p.fade_beta},
                            {"temp_mean", p.temp_mean},
                            {"ir_fresh", p.ir_fresh},
                            {"nominal_voltage", p.nominal_voltage}});
  }
  return {{"cells", cells},
          {"cycles_per_cell", cycles_per_cell},
          {"noise_sigma", noise_sigma},
          {"feature_noise", feature_noise},
          {"seed", seed},
          {"presets", presets_json}};
}

SynthDataset SynthGenerate(const SynthConfig& config) {
  if (config.cells < 1) Fail(ErrorCode::kInvalidConfig, "cells must be >= 1");
  if (config.cycles_per_cell < 2) {
    Fail(ErrorCode::kInvalidConfig, "cycles_per_cell must be >= 2");
  }
  if (!(config.noise_sigma >= 0.0)) {
    Fail(ErrorCode::kInvalidConfig, "noise_sigma must be >= 0");
  }
  if (!(config.feature_noise >= 0.0)) {
    Fail(ErrorCode::kInvalidConfig, "feature_noise must be >= 0");
  }
  if (config.presets.empty()) {
    Fail(ErrorCode::kInvalidConfig, "at least one chemistry preset required");
  }
  for (const auto& p : config.presets) {
    if (!(p.nominal_capacity > 0.0) || !(p.fade_alpha > 0.0) ||
        !(p.fade_alpha < 1.0) || !(p.fade_beta > 0.0)) {
      Fail(ErrorCode::kInvalidConfig, "preset " + p.name +
                                          " needs C0 > 0, 0 < alpha < 1, "
                                          "beta > 0");
    }
  }

  Schema schema(kCanonicalFeatures.begin(), kCanonicalFeatures.end());
  const auto cycles = static_cast<std::size_t>(config.cycles_per_cell);
  const double c_max = static_cast<double>(cycles);
  const double fn = config.feature_noise;
  std::vector<CycleRecord> records;
  records.reserve(static_cast<std::size_t>(config.cells) * cycles);
  std::vector<SynthCell> cells;

  for (int k = 0; k < config.cells; ++k) {
    const auto& p =
        config.presets[static_cast<std::size_t>(k) % config.presets.size()];
    Rng rng(DeriveSeed(config.seed, {static_cast<std::uint64_t>(k)}));
    const double alpha =
        std::min(0.95, p.fade_alpha * (1.0 + 0.1 * rng.Uniform(-1.0, 1.0)));
    char id[32];
    std::snprintf(id, sizeof(id), "syn-%03d", k);
    cells.push_back({id, p.name, p.nominal_capacity, alpha, p.fade_beta});

    const double c0 = p.nominal_capacity;
    for (std::size_t c = 0; c < cycles; ++c) {
      const double u = static_cast<double>(c) / c_max;
      const double fade = alpha * std::pow(u, p.fade_beta);
      const double clean = c0 * (1.0 - fade);
      const double capacity =
          std::max(0.0, clean + rng.Normal(0.0, config.noise_sigma));
      const double soh = capacity / c0;

      const double cvct = 600.0 + 2400.0 * fade + rng.Normal(0.0, 60.0 * fn);
      const double ccct = 3000.0 * (1.0 - fade) + rng.Normal(0.0, 80.0 * fn);
      Eigen::VectorXd f(10);
      f << c0 - clean + rng.Normal(0.0, 0.002 * fn),                 // Qdlin
          cvct,                                                       // CVCT
          p.temp_mean + 8.0 * fade +
              0.8 * std::sin(2.0 * std::numbers::pi * c / 37.0) +
              rng.Normal(0.0, 0.6 * fn),                              // Temp_m
          c0 * (1.0 - 0.05 * fade) + rng.Normal(0.0, 0.03 * fn),     // Current_m
          p.nominal_voltage - 0.15 * fade + rng.Normal(0.0, 0.01 * fn),
          p.nominal_voltage - 0.75 - 0.3 * fade +
              rng.Normal(0.0, 0.02 * fn),                             // Voltage_l
          soh,                                                        // SOH
          p.ir_fresh * (1.0 + 1.5 * fade) + rng.Normal(0.0, 0.002 * fn),
          ccct + cvct + rng.Normal(0.0, 40.0 * fn),                   // chargetime
          ccct;                                                       // CCCT
      records.push_back({Source::kSynthetic, id, c, std::move(f), capacity});
    }
  }
  return SynthDataset{DataTable::FromRecords(std::move(schema), records),
                      std::move(cells)};
}

// ---------------------------------------------------------------------------
// Splits

std::string_view GroupingName(Grouping grouping) {
  return grouping == Grouping::kByCell ? "cell" : "row";
}

std::optional<Grouping> ParseGrouping(std::string_view name) {
  if (name == "row" || name == "ByRow") return Grouping::kByRow;
  if (name == "cell" || name == "ByCell") return Grouping::kByCell;
  return std::nullopt;
}

namespace {

std::vector<std::vector<std::size_t>> Groups(const DataTable& table,
                                             Grouping grouping) {
  std::vector<std::vector<std::size_t>> groups;
  if (grouping == Grouping::kByRow) {
    groups.reserve(table.rows());
    for (std::size_t i = 0; i < table.rows(); ++i) groups.push_back({i});
  } else {
    for (auto& g : table.Cells()) groups.push_back(std::move(g.rows));
  }
  return groups;
}

std::vector<std::size_t> ShuffledOrder(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.Shuffle(std::span<std::size_t>(order));
  return order;
}

}  // namespace

TrainTest Split(const DataTable& table, const SplitSpec& spec) {
  if (table.empty()) Fail(ErrorCode::kEmptyTable, "cannot split an empty table");
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    Fail(ErrorCode::kInvalidConfig, "test_fraction must lie in (0, 1)");
  }
  const auto groups = Groups(table, spec.grouping);
  if (groups.size() < 2) {
    Fail(ErrorCode::kInvalidConfig,
         "split needs at least 2 groups, table has " +
             std::to_string(groups.size()));
  }
  const auto g = static_cast<double>(groups.size());
  auto n_test = static_cast<std::size_t>(std::llround(spec.test_fraction * g));
  n_test = std::clamp<std::size_t>(n_test, 1, groups.size() - 1);

  const auto order = ShuffledOrder(groups.size(), DeriveSeed(spec.seed, {0}));
  std::vector<char> is_test(table.rows(), 0);
  for (std::size_t k = 0; k < n_test; ++k) {
    for (auto r : groups[order[k]]) is_test[r] = 1;
  }
  std::vector<std::size_t> train, test;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    (is_test[i] ? test : train).push_back(i);
  }
  return TrainTest{table.Select(train), table.Select(test)};
}

std::vector<Fold> MakeFolds(const DataTable& table, const SplitSpec& spec) {
  if (spec.fold_count < 2) {
    Fail(ErrorCode::kInvalidConfig, "fold_count must be >= 2");
  }
  const auto groups = Groups(table, spec.grouping);
  const auto k = static_cast<std::size_t>(spec.fold_count);
  if (k > groups.size()) {
    Fail(ErrorCode::kTooManyFolds,
         std::to_string(k) + " folds requested but only " +
             std::to_string(groups.size()) + " groups available");
  }
  const auto order = ShuffledOrder(groups.size(), DeriveSeed(spec.seed, {1}));
  std::vector<std::size_t> fold_of(table.rows(), 0);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    for (auto r : groups[order[pos]]) fold_of[r] = pos % k;
  }
  std::vector<Fold> folds(k);
  for (std::size_t i = 0; i < table.rows(); ++i) {
    for (std::size_t f = 0; f < k; ++f) {
      (fold_of[i] == f ? folds[f].validation : folds[f].train).push_back(i);
    }
  }
  return folds;
}

}  // namespace lifefuse
