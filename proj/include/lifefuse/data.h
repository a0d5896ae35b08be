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

#ifndef LIFEFUSE_DATA_H_
#define LIFEFUSE_DATA_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace lifefuse {

using FeatureId = std::string;
using Schema = std::vector<FeatureId>;

// Row-major so that a row (one cycle) is contiguous.
using FeatureMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr std::array<std::string_view, 10> kCanonicalFeatures = {
    "Qdlin",     "CVCT",      "Temp_m", "Current_m", "Voltage_m",
    "Voltage_l", "SOH",       "ir",     "chargetime", "CCCT"};

enum class Source { kNasa, kCalce, kMitTrc, kNca, kSynthetic };

std::string_view SourceName(Source source);
std::optional<Source> ParseSource(std::string_view name);

struct CycleRecord {
  Source source = Source::kSynthetic;
  std::string cell_id;
  std::uint64_t cycle = 0;
  Eigen::VectorXd features;
  double target = 0.0;  // discharge capacity, Ah
};

struct FeatureStats {
  double mean = 0.0;
  double stddev = 1.0;
};

// Per-source, per-feature z-score parameters (indexed like the schema).
using Normalization = std::map<Source, std::vector<FeatureStats>>;

// Rows of one (source, cell) pair, sorted by cycle.
struct CellGroup {
  Source source;
  std::string cell_id;
  std::vector<std::size_t> rows;
};

// Immutable per-cycle table. Construction validates every invariant: aligned
// column lengths, finite values, non-negative targets, unique
// (source, cell_id, cycle) keys and positive recorded stddevs.
class DataTable {
 public:
  DataTable(Schema schema, std::vector<Source> sources,
            std::vector<std::string> cell_ids, std::vector<std::uint64_t> cycles,
            FeatureMatrix features, Eigen::VectorXd target,
            std::optional<Normalization> normalization = std::nullopt,
            std::string target_name = "capacity");

  static DataTable FromRecords(Schema schema,
                               std::span<const CycleRecord> records,
                               std::string target_name = "capacity");

  std::size_t rows() const { return static_cast<std::size_t>(target_.size()); }
  std::size_t num_features() const { return schema_.size(); }
  bool empty() const { return rows() == 0; }

  const Schema& schema() const { return schema_; }
  const FeatureMatrix& features() const { return features_; }
  const Eigen::VectorXd& target() const { return target_; }
  const std::string& target_name() const { return target_name_; }
  const std::vector<Source>& sources() const { return sources_; }
  const std::vector<std::string>& cell_ids() const { return cell_ids_; }
  const std::vector<std::uint64_t>& cycles() const { return cycles_; }
  const std::optional<Normalization>& normalization() const {
    return normalization_;
  }

  CycleRecord record(std::size_t row) const;

  // Index of `name` in the schema, if present.
  std::optional<std::size_t> FeatureIndex(std::string_view name) const;

  // Rows in the given order.
  DataTable Select(std::span<const std::size_t> rows) const;
  // Projects onto `names` in that order. Throws MissingColumn. Normalization
  // metadata is projected along.
  DataTable SelectFeatures(const Schema& names) const;
  // Same keys and targets, replaced feature values.
  DataTable WithFeatures(FeatureMatrix features) const;

  // (source, cell) groups in order of first appearance.
  std::vector<CellGroup> Cells() const;

 private:
  Schema schema_;
  std::vector<Source> sources_;
  std::vector<std::string> cell_ids_;
  std::vector<std::uint64_t> cycles_;
  FeatureMatrix features_;
  Eigen::VectorXd target_;
  std::optional<Normalization> normalization_;
  std::string target_name_;
};

// ---------------------------------------------------------------------------
// CSV ingestion

// How CSV headers map onto the table. `source` names a column when the header
// has it, otherwise it is taken as a literal source tag for every row. Empty
// `cell_id` puts every row in one cell; empty `cycle` numbers rows in file
// order.
struct ColumnMapping {
  std::string target;
  std::vector<std::string> features;
  std::string source = "SYNTHETIC";
  std::string cell_id;
  std::string cycle;

  static ColumnMapping FromJson(const nlohmann::json& j);
  nlohmann::json ToJson() const;
  // Mapping matching the layout written by WriteCsv.
  static ColumnMapping ForTable(const DataTable& table);
};

struct LoadResult {
  DataTable table;
  std::size_t dropped = 0;  // rows with a missing or unparseable mapped cell
};

LoadResult LoadCsv(const std::filesystem::path& path,
                   const ColumnMapping& mapping);
LoadResult ParseCsv(std::istream& in, const ColumnMapping& mapping);

// Writes source,cell_id,cycle,<schema...>,<target> with 17 significant digits.
void WriteCsv(const DataTable& table, std::ostream& out);
void WriteCsv(const DataTable& table, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Standardization

// Per-(source, feature) z-score. Statistics (sample stddev) come from
// `stats_source` when given, otherwise from `table`. Throws DegenerateFeature
// for a group with zero variance.
DataTable Standardize(const DataTable& table);
DataTable Standardize(const DataTable& table, const DataTable& stats_source);
// Inverts Standardize using the recorded normalization metadata.
DataTable Unstandardize(const DataTable& table);

// ---------------------------------------------------------------------------
// Synthetic degradation data

struct ChemistryPreset {
  std::string name;
  double nominal_capacity;  // C0, Ah
  double fade_alpha;        // fraction of C0 lost at the last cycle
  double fade_beta;         // fade curvature; > 1 gives a knee
  double temp_mean;         // deg C
  double ir_fresh;          // ohm
  double nominal_voltage;   // V
};

std::vector<ChemistryPreset> DefaultPresets();

struct SynthConfig {
  int cells = 4;
  int cycles_per_cell = 200;
  std::vector<ChemistryPreset> presets = DefaultPresets();
  double noise_sigma = 0.005;  // capacity noise, Ah
  double feature_noise = 1.0;  // multiplier on the per-feature noise scales
  std::uint64_t seed = 7;

  static SynthConfig FromJson(const nlohmann::json& j);
  nlohmann::json ToJson() const;
};

struct SynthCell {
  std::string cell_id;
  std::string preset;
  double nominal_capacity;
  double fade_alpha;
  double fade_beta;
};

struct SynthDataset {
  DataTable table;
  std::vector<SynthCell> cells;
};

// Capacity per cell follows C(c) = C0 (1 - alpha (c / c_max)^beta) + eps with
// eps ~ N(0, noise_sigma), clamped at 0, c = 0 .. cycles-1, c_max = cycles.
// Cells cycle through the presets; alpha is jittered by +-10% per cell.
// Features in canonical order (sigma_* scaled by feature_noise, fade = 1-SOH
// using the noiseless curve):
//   Qdlin      = C_clean(0) - C_clean(c)                + N(0, 0.002)
//   CVCT       = 600 + 2400 fade                         + N(0, 60)
//   Temp_m     = T + 8 fade + 0.8 sin(2 pi c / 37)        + N(0, 0.6)
//   Current_m  = C0 (1 - 0.05 fade)                      + N(0, 0.03)
//   Voltage_m  = V - 0.15 fade                           + N(0, 0.01)
//   Voltage_l  = V - 0.75 - 0.3 fade                     + N(0, 0.02)
//   SOH        = C(c) / C0                               (exact)
//   ir         = ir0 (1 + 1.5 fade)                      + N(0, 0.002)
//   chargetime = CCCT + CVCT                             + N(0, 40)
//   CCCT       = 3000 (1 - fade)                         + N(0, 80)
SynthDataset SynthGenerate(const SynthConfig& config);

// ---------------------------------------------------------------------------
// Splits and folds

enum class Grouping { kByRow, kByCell };

std::string_view GroupingName(Grouping grouping);
std::optional<Grouping> ParseGrouping(std::string_view name);

struct SplitSpec {
  double test_fraction = 0.25;
  int fold_count = 5;
  std::uint64_t seed = 0;
  Grouping grouping = Grouping::kByRow;
};

struct TrainTest {
  DataTable train;
  DataTable test;
};

// Shuffled by seed; test receives round(test_fraction * groups) groups
// (at least one, and at least one group stays in train). Row order within
// each side follows the input table.
TrainTest Split(const DataTable& table, const SplitSpec& spec);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

// Shuffled groups dealt round-robin over fold_count folds. Index lists are
// ascending.
std::vector<Fold> MakeFolds(const DataTable& table, const SplitSpec& spec);

}  // namespace lifefuse

#endif  // LIFEFUSE_DATA_H_
