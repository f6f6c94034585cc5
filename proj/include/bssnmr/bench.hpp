#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bssnmr/bss.hpp"
#include "bssnmr/lineshape.hpp"
#include "bssnmr/scoring.hpp"
#include "bssnmr/synth.hpp"

namespace bssnmr {

enum class ComponentMode { fixed4, fixed6, random2to10 };
std::string to_string(ComponentMode m);
ComponentMode parse_component_mode(const std::string& s);

/// Six-step noise ladder used for the noise sweep.
inline const std::vector<double> kNoiseLadder{0.0, 0.0001, 0.000178, 0.000316, 0.000562, 0.001};

struct BenchmarkPlan {
  std::uint64_t master_seed = 20240501;
  int n_datasets_per_cell = 20;
  std::vector<ComponentMode> component_modes{ComponentMode::fixed4, ComponentMode::fixed6,
                                             ComponentMode::random2to10};
  std::vector<IntensityModel> models{IntensityModel::inversion, IntensityModel::nutation};
  std::vector<double> noise_levels = kNoiseLadder;
  std::vector<Normalization> normalizations{Normalization::none, Normalization::peak, Normalization::area};
  std::vector<TechniqueId> techniques = TechniqueId::roster();
  std::vector<int> k_offsets{-2, -1, 0, 1, 2, 3, 4};
  BssOptions options;

  /// Number of distinct mixture datasets (shared by every technique).
  std::size_t dataset_count() const;
  std::size_t decomposition_count() const;
  void validate() const;

  nlohmann::json to_json() const;
  /// Missing fields take their defaults; unknown fields are rejected.
  static BenchmarkPlan from_json(const nlohmann::json& j);
};

/// Random-access pure-component source. A file-backed library is a plain
/// vector; a grid-backed one simulates components on demand.
struct LibraryView {
  std::size_t size = 0;
  std::function<PureComponent(std::size_t)> at;

  static LibraryView of(const std::vector<PureComponent>& components);
  /// Simulates grid points lazily (thread-safe, memoized).
  static LibraryView of(const LibraryGridSpec& spec, const SpectrumGrid& grid, const PowderOptions& powder = {});
};

/// Identifies one mixture dataset of a plan.
struct DatasetKey {
  IntensityModel model = IntensityModel::inversion;
  double noise = 0.0;
  ComponentMode mode = ComponentMode::fixed4;
  int index = 0;
  auto operator<=>(const DatasetKey&) const = default;
};

std::uint64_t dataset_seed(std::uint64_t master_seed, const DatasetKey& key);

/// The raw (unnormalized) dataset for `key`. Deterministic in (master seed, key).
MixtureDataset make_dataset(const BenchmarkPlan& plan, const DatasetKey& key, const LibraryView& library,
                            std::vector<PureComponent>* pures_out = nullptr);

/// One decomposition outcome; the unit of incremental persistence.
struct RunRecord {
  DatasetKey dataset;
  Normalization normalization = Normalization::none;
  std::string technique;
  int k_offset = 0;
  int true_k = 0;
  int k = 0;
  bool clamped = false;  // true_k + k_offset < 1
  bool ok = false;
  std::string failure;   // message when !ok
  double error = 0.0;    // dataset_error when ok
  double ensemble_score = 0.0;
  bool converged = true;
  double runtime_seconds = 0.0;
  std::vector<MatchedPair> pairs;

  nlohmann::json to_json() const;
  static RunRecord from_json(const nlohmann::json& j);
};

struct CellKey {
  IntensityModel model = IntensityModel::inversion;
  double noise = 0.0;
  Normalization normalization = Normalization::none;
  ComponentMode mode = ComponentMode::fixed4;
  std::string technique;
  int k_offset = 0;
  auto operator<=>(const CellKey&) const = default;
};

struct CellResult {
  CellKey key;
  std::vector<int> dataset_index;  // parallel to errors, ascending
  std::vector<double> errors;      // successful runs only
  int failures = 0;
  int clamped = 0;
  std::vector<double> runtimes;    // every run, ascending dataset index
};

struct RunOptions {
  unsigned workers = 1;
  /// Append-only JSON-lines log of RunRecords; empty disables persistence.
  std::filesystem::path record_log;
  /// Reuse records already present in `record_log`.
  bool resume = false;
  std::function<void(std::size_t done, std::size_t total)> progress;
};

/// Run every decomposition of the plan and group the results by cell.
/// Technique failures are recorded, never thrown.
std::vector<CellResult> run_plan(const BenchmarkPlan& plan, const LibraryView& library, const RunOptions& run = {});

/// Records of a plan, including ones loaded from a resume log.
std::vector<RunRecord> run_records(const BenchmarkPlan& plan, const LibraryView& library, const RunOptions& run = {});

/// Deterministic grouping, independent of record order.
std::vector<CellResult> group_records(std::vector<RunRecord> records);

/// Read a JSON-lines record log; a truncated final line is ignored.
std::vector<RunRecord> read_record_log(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Aggregates

struct Table1Row {
  std::string technique;
  Normalization normalization = Normalization::none;
  int n = 0;
  int failures = 0;
  double mean = 0.0, min = 0.0, max = 0.0;
  int runtime_factor = 0;
};

/// Exact-k rows per technique x normalization.
std::vector<Table1Row> aggregate_table1(const std::vector<CellResult>& results);

struct Table2Row {
  std::string group;
  std::map<int, double> ratio;  // k_offset -> mean(error at offset) / mean(error at exact)
  std::map<int, int> n;         // matched dataset count per offset
};

/// Overprediction ratios per technique group. Errors are paired by dataset
/// so every ratio compares the same inputs; sub-variants are pooled.
std::vector<Table2Row> aggregate_table2(const std::vector<CellResult>& results);

struct Table3Row {
  std::string group;
  std::map<double, double> mean;  // noise -> mean exact-k error, no normalization
  std::map<double, int> n;
};

std::vector<Table3Row> aggregate_table3(const std::vector<CellResult>& results);

/// floor(log10) of the most populated decade of runtimes; ties go to the faster decade.
int runtime_factor(const std::vector<double>& runtimes_seconds);

std::string table1_csv(const std::vector<Table1Row>& rows);
std::string table2_csv(const std::vector<Table2Row>& rows);
std::string table3_csv(const std::vector<Table3Row>& rows);
/// Runtime summary kept apart from the error tables, which must not depend on timing.
std::string runtimes_csv(const std::vector<CellResult>& results);

/// Write table1/2/3 and runtimes CSVs into `dir`.
void write_report_bundle(const std::vector<CellResult>& results, const std::filesystem::path& dir);

}  // namespace bssnmr
