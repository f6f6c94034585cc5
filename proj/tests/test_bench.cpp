#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <unistd.h>

#include "bssnmr/bench.hpp"

using namespace bssnmr;
namespace fs = std::filesystem;

namespace {

std::vector<PureComponent> toy_library(int n) {
  SpectrumGrid g;
  std::vector<PureComponent> lib;
  for (int i = 0; i < n; ++i) {
    QuadrupolarParams p;
    p.cq_hz = 1e6 * (i % 3);
    p.eta = 0.1 * (i % 10);
    p.delta_iso_hz = -4000.0 + 8000.0 * i / std::max(1, n - 1);
    p.gaussian_broaden = 16.0;
    PureComponent pc = simulate_pure(p, g, PowderOptions{64, 32});
    pc.id = "toy" + std::to_string(i);
    lib.push_back(std::move(pc));
  }
  return lib;
}

const LibraryView& library() {
  static const std::vector<PureComponent> lib = toy_library(14);
  static const LibraryView view = LibraryView::of(lib);
  return view;
}

BenchmarkPlan tiny_plan() {
  BenchmarkPlan p;
  p.master_seed = 99;
  p.n_datasets_per_cell = 2;
  p.component_modes = {ComponentMode::fixed4};
  p.models = {IntensityModel::inversion};
  p.noise_levels = {0.000316};
  p.normalizations = {Normalization::none};
  p.techniques = {TechniqueId::parse("svd"), TechniqueId::parse("pca")};
  p.k_offsets = {0};
  return p;
}

bool same_results(const std::vector<CellResult>& a, const std::vector<CellResult>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i].key == b[i].key) || a[i].dataset_index != b[i].dataset_index || a[i].failures != b[i].failures ||
        a[i].clamped != b[i].clamped || a[i].errors.size() != b[i].errors.size())
      return false;
    if (std::memcmp(a[i].errors.data(), b[i].errors.data(), sizeof(double) * a[i].errors.size()) != 0) return false;
  }
  return true;
}

CellResult cell(std::string technique, int offset, std::vector<double> errors, double noise = 0.0) {
  CellResult c;
  c.key.technique = std::move(technique);
  c.key.k_offset = offset;
  c.key.noise = noise;
  for (std::size_t i = 0; i < errors.size(); ++i) c.dataset_index.push_back(static_cast<int>(i));
  c.errors = std::move(errors);
  c.runtimes.assign(c.errors.size(), 0.01);
  return c;
}

fs::path temp_path(const std::string& name) {
  return fs::temp_directory_path() / ("bssnmr_test_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

// --- run_plan ------------------------------------------------------------

TEST(RunPlan, OneCellTwoDatasetsTwoTechniques) {
  const BenchmarkPlan plan = tiny_plan();
  const auto results = run_plan(plan, library());
  ASSERT_EQ(results.size(), 2u);
  for (const auto& c : results) {
    EXPECT_EQ(c.errors.size(), 2u);
    EXPECT_EQ(c.failures, 0);
    EXPECT_EQ(c.dataset_index, (std::vector<int>{0, 1}));
  }
}

// Every technique must be fed the one dataset make_dataset produces for the key;
// recompute each error from scratch on that dataset and require bit equality.
TEST(RunPlan, TechniquesShareDatasets) {
  const BenchmarkPlan plan = tiny_plan();
  const auto records = run_records(plan, library());
  ASSERT_EQ(records.size(), 4u);
  for (const auto& r : records) {
    ASSERT_TRUE(r.ok) << r.failure;
    std::vector<PureComponent> pures;
    const MixtureDataset ds = make_dataset(plan, r.dataset, library(), &pures);
    const MixtureDataset again = make_dataset(plan, r.dataset, library());
    ASSERT_EQ(std::memcmp(ds.spectra.data(), again.spectra.data(), sizeof(double) * ds.spectra.size()), 0);
    const auto seed = derive_seed(dataset_seed(plan.master_seed, r.dataset), {20});
    const ComponentSet set = decompose(ds, TechniqueId::parse(r.technique), r.k, seed, plan.options);
    const double expected = best_assignment(set.components, pure_matrix(pures)).dataset_error;
    EXPECT_EQ(std::bit_cast<std::uint64_t>(expected), std::bit_cast<std::uint64_t>(r.error)) << r.technique;
  }
}

TEST(RunPlan, DatasetsDifferByIndex) {
  const BenchmarkPlan plan = tiny_plan();
  const auto a = make_dataset(plan, {IntensityModel::inversion, 0.000316, ComponentMode::fixed4, 0}, library());
  const auto b = make_dataset(plan, {IntensityModel::inversion, 0.000316, ComponentMode::fixed4, 1}, library());
  EXPECT_GT((a.spectra - b.spectra).norm(), 0.0);
}

TEST(RunPlan, RerunIsBitIdentical) {
  BenchmarkPlan plan = tiny_plan();
  plan.techniques.push_back(TechniqueId::parse("fastica"));
  EXPECT_TRUE(same_results(run_plan(plan, library()), run_plan(plan, library())));
}

TEST(RunPlan, WorkerCountDoesNotMatter) {
  BenchmarkPlan plan = tiny_plan();
  plan.n_datasets_per_cell = 3;
  plan.models = {IntensityModel::inversion, IntensityModel::nutation};
  const auto serial = run_plan(plan, library(), RunOptions{1});
  const auto parallel = run_plan(plan, library(), RunOptions{4});
  EXPECT_TRUE(same_results(serial, parallel));
  EXPECT_EQ(table1_csv(aggregate_table1(serial)), table1_csv(aggregate_table1(parallel)));
}

TEST(RunPlan, NegativeOffsetIsClampedAndFlagged) {
  BenchmarkPlan plan = tiny_plan();
  plan.component_modes = {ComponentMode::random2to10};
  plan.n_datasets_per_cell = 30;
  plan.techniques = {TechniqueId::parse("svd")};
  plan.k_offsets = {-2, 0};
  const auto records = run_records(plan, library());
  int seen = 0;
  for (const auto& r : records) {
    EXPECT_EQ(r.k, std::max(1, r.true_k + r.k_offset));
    EXPECT_EQ(r.clamped, r.true_k + r.k_offset < 1);
    EXPECT_GE(r.true_k, 2);
    EXPECT_LE(r.true_k, 10);
    if (r.true_k == 2 && r.k_offset == -2) {
      EXPECT_EQ(r.k, 1);
      EXPECT_TRUE(r.clamped);
      ++seen;
    }
  }
  ASSERT_GT(seen, 0) << "no two-component dataset drawn";
  int clamped = 0;
  for (const auto& c : group_records(records)) clamped += c.clamped;
  EXPECT_EQ(clamped, seen);
}

TEST(RunPlan, FailuresAreRecordedNotThrown) {
  BenchmarkPlan plan = tiny_plan();
  plan.techniques = {TechniqueId::parse("svd"), TechniqueId::parse("simplisma:offset0")};
  plan.k_offsets = {0, 4};
  plan.normalizations = {Normalization::none};
  std::vector<CellResult> results;
  ASSERT_NO_THROW(results = run_plan(plan, library()));
  for (const auto& c : results) EXPECT_EQ(static_cast<int>(c.errors.size()) + c.failures, 2);
}

TEST(RunPlan, RejectsBadInput) {
  BenchmarkPlan plan = tiny_plan();
  EXPECT_THROW(run_plan(plan, LibraryView::of(std::vector<PureComponent>{})), std::invalid_argument);
  plan.k_offsets = {1, 2};
  EXPECT_THROW(run_plan(plan, library()), std::invalid_argument);
  plan = tiny_plan();
  plan.n_datasets_per_cell = 0;
  EXPECT_THROW(run_plan(plan, library()), std::invalid_argument);
}

// --- resume ---------------------------------------------------------------

TEST(Resume, InterruptedLogGivesSameAggregates) {
  BenchmarkPlan plan = tiny_plan();
  plan.n_datasets_per_cell = 3;
  const fs::path log = temp_path("resume.jsonl");
  RunOptions opt;
  opt.record_log = log;
  const auto full = run_plan(plan, library(), opt);

  // Keep the first few records and cut the next line in half, as a kill would.
  std::vector<std::string> lines;
  {
    std::ifstream in(log);
    for (std::string s; std::getline(in, s);) lines.push_back(s);
  }
  ASSERT_EQ(lines.size(), 6u);
  {
    std::ofstream out(log, std::ios::trunc);
    for (int i = 0; i < 2; ++i) out << lines[i] << '\n';
    out << lines[2].substr(0, lines[2].size() / 2);
  }
  EXPECT_EQ(read_record_log(log).size(), 2u);

  opt.resume = true;
  const auto resumed = run_plan(plan, library(), opt);
  EXPECT_TRUE(same_results(full, resumed));
  EXPECT_EQ(read_record_log(log).size(), 6u);
  fs::remove(log);
}

TEST(Resume, RecordJsonRoundTrip) {
  const auto records = run_records(tiny_plan(), library());
  for (const auto& r : records) {
    const RunRecord back = RunRecord::from_json(nlohmann::json::parse(r.to_json().dump()));
    EXPECT_EQ(back.dataset, r.dataset);
    EXPECT_EQ(back.technique, r.technique);
    EXPECT_EQ(back.k, r.k);
    EXPECT_EQ(std::bit_cast<std::uint64_t>(back.error), std::bit_cast<std::uint64_t>(r.error));
    EXPECT_EQ(back.pairs.size(), r.pairs.size());
  }
}

// --- plan -----------------------------------------------------------------

TEST(Plan, JsonRoundTrip) {
  BenchmarkPlan p = tiny_plan();
  p.k_offsets = {-1, 0, 3};
  p.noise_levels = {0.0, 0.001};
  const BenchmarkPlan back = BenchmarkPlan::from_json(p.to_json());
  EXPECT_EQ(back.to_json(), p.to_json());
  EXPECT_EQ(back.dataset_count(), p.dataset_count());
}

TEST(Plan, DefaultsAndUnknownFields) {
  const BenchmarkPlan d = BenchmarkPlan::from_json(nlohmann::json::object());
  EXPECT_EQ(d.n_datasets_per_cell, 20);
  EXPECT_EQ(d.k_offsets, (std::vector<int>{-2, -1, 0, 1, 2, 3, 4}));
  EXPECT_EQ(d.noise_levels.size(), 6u);
  // 2 models x 6 noise x 3 modes x 20
  EXPECT_EQ(d.dataset_count(), 720u);
  EXPECT_THROW(BenchmarkPlan::from_json(nlohmann::json{{"n_dataset", 3}}), std::invalid_argument);
}

// --- aggregates -------------------------------------------------------------

TEST(Table1, SingleDatasetMeanEqualsMinMax) {
  const auto rows = aggregate_table1({cell("svd", 0, {0.7})});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].mean, 0.7);
  EXPECT_EQ(rows[0].min, 0.7);
  EXPECT_EQ(rows[0].max, 0.7);
}

TEST(Table1, MeanMinMax) {
  const auto rows = aggregate_table1({cell("svd", 0, {1.0, 2.0, 3.0}), cell("svd", 1, {9.0})});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_DOUBLE_EQ(rows[0].mean, 2.0);
  EXPECT_EQ(rows[0].min, 1.0);
  EXPECT_EQ(rows[0].max, 3.0);
  EXPECT_EQ(rows[0].n, 3);
}

TEST(Table1, MinMeanMaxOrdering) {
  Rng rng(5);
  std::vector<CellResult> cells;
  for (const char* t : {"svd", "pca", "vca"}) {
    std::vector<double> e(17);
    for (double& v : e) v = rng.uniform();
    cells.push_back(cell(t, 0, e));
  }
  for (const auto& r : aggregate_table1(cells)) {
    EXPECT_LE(r.min, r.mean);
    EXPECT_LE(r.mean, r.max);
  }
}

TEST(Table1, RowsFollowRosterOrder) {
  const auto rows = aggregate_table1({cell("vca", 0, {1}), cell("svd", 0, {1}), cell("fastica", 0, {1})});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].technique, "svd");
  EXPECT_EQ(rows[1].technique, "fastica");
  EXPECT_EQ(rows[2].technique, "vca");
}

TEST(RuntimeFactor, ModalDecade) {
  EXPECT_EQ(runtime_factor({0.3, 0.25, 0.41, 0.35, 2.0, 0.05}), -1);
  EXPECT_EQ(runtime_factor({0.002, 0.004, 12.0}), -3);
  EXPECT_EQ(runtime_factor({1.5, 3.0, 0.5}), 0);
  // tie -> faster decade
  EXPECT_EQ(runtime_factor({0.05, 5.0}), -2);
}

TEST(FailureAccounting, FailuresExcludedFromStatistics) {
  CellResult c = cell("svd", 0, {0.2, 0.4});
  c.failures = 3;
  const auto rows = aggregate_table1({c});
  EXPECT_EQ(rows[0].n, 2);
  EXPECT_EQ(rows[0].failures, 3);
  EXPECT_DOUBLE_EQ(rows[0].mean, 0.3);
}

TEST(Table2, ExactColumnIsOne) {
  const auto rows = aggregate_table2({cell("fastica", 0, {0.2, 0.4}), cell("fastica", 2, {0.5, 0.7})});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].ratio.at(0), 1.0);
  EXPECT_DOUBLE_EQ(rows[0].ratio.at(2), 2.0);
  EXPECT_EQ(rows[0].n.at(2), 2);
}

TEST(Table2, SubVariantsPooledAndPairedByDataset) {
  // nnmf variants share a group; dataset 1 failed at +1 and must drop from both sides.
  CellResult plus = cell("nnmf:nndsvd", 1, {0.3});
  std::vector<CellResult> cells{cell("nnmf:nndsvd", 0, {0.1, 10.0}), plus, cell("nnmf:random", 0, {0.2}),
                                cell("nnmf:random", 1, {0.2})};
  const auto rows = aggregate_table2(cells);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].group, "nnmf");
  EXPECT_DOUBLE_EQ(rows[0].ratio.at(1), (0.3 + 0.2) / (0.1 + 0.2));
  EXPECT_EQ(rows[0].n.at(1), 2);
}

TEST(Table3, SixNoiseColumns) {
  std::vector<CellResult> cells;
  for (double n : kNoiseLadder) cells.push_back(cell("svd", 0, {n * 100 + 0.5}, n));
  const auto rows = aggregate_table3(cells);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].mean.size(), 6u);
  const std::string csv = table3_csv(rows);
  const std::string header = csv.substr(0, csv.find('\n'));
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), 6);
}

TEST(Table3, OnlyUnnormalizedExactRows) {
  CellResult peak = cell("svd", 0, {100.0});
  peak.key.normalization = Normalization::peak;
  const auto rows = aggregate_table3({cell("svd", 0, {0.5}), peak, cell("svd", 1, {100.0})});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].mean.at(0.0), 0.5);
}

TEST(Table3, NoiselessSvdBelowNoiseAverage) {
  BenchmarkPlan plan = tiny_plan();
  plan.noise_levels = kNoiseLadder;
  plan.n_datasets_per_cell = 3;
  plan.techniques = {TechniqueId::parse("svd")};
  const auto rows = aggregate_table3(run_plan(plan, library()));
  ASSERT_EQ(rows.size(), 1u);
  ASSERT_EQ(rows[0].mean.size(), 6u);
  double all = 0.0;
  for (const auto& [n, m] : rows[0].mean) all += m;
  all /= 6.0;
  EXPECT_LT(rows[0].mean.at(0.0), all);
}

TEST(CellIsolation, DroppingACellLeavesOthersUnchanged) {
  BenchmarkPlan plan = tiny_plan();
  plan.techniques = {TechniqueId::parse("svd"), TechniqueId::parse("pca"), TechniqueId::parse("vca")};
  plan.k_offsets = {0, 1};
  const auto results = run_plan(plan, library());
  const auto t1 = aggregate_table1(results);
  const auto t2 = aggregate_table2(results);
  for (std::size_t drop = 0; drop < results.size(); ++drop) {
    auto fewer = results;
    fewer.erase(fewer.begin() + static_cast<long>(drop));
    const std::string dropped = results[drop].key.technique;
    for (const auto& r : aggregate_table1(fewer)) {
      if (r.technique == dropped) continue;
      auto it = std::find_if(t1.begin(), t1.end(), [&](const Table1Row& x) { return x.technique == r.technique; });
      ASSERT_NE(it, t1.end());
      EXPECT_EQ(it->mean, r.mean);
      EXPECT_EQ(it->n, r.n);
    }
    for (const auto& r : aggregate_table2(fewer)) {
      if (r.group == TechniqueId::parse(dropped).group()) continue;
      auto it = std::find_if(t2.begin(), t2.end(), [&](const Table2Row& x) { return x.group == r.group; });
      ASSERT_NE(it, t2.end());
      EXPECT_EQ(it->ratio, r.ratio);
    }
  }
}

// --- csv ------------------------------------------------------------------

TEST(Csv, HeadersAndBundle) {
  const auto results = run_plan(tiny_plan(), library());
  EXPECT_EQ(table1_csv(aggregate_table1(results)).rfind("technique,normalization,n,failures,mean,min,max\n", 0), 0u);
  EXPECT_EQ(table2_csv(aggregate_table2(results)).rfind("group,exact\n", 0), 0u);
  EXPECT_EQ(runtimes_csv(results).rfind("technique,runs,median_seconds,runtime_factor\n", 0), 0u);

  const fs::path dir = temp_path("bundle");
  write_report_bundle(results, dir);
  for (const char* f : {"table1.csv", "table2.csv", "table3.csv", "runtimes.csv"}) EXPECT_TRUE(fs::exists(dir / f));
  fs::remove_all(dir);
}

TEST(Csv, ErrorTablesIgnoreRuntime) {
  auto a = run_plan(tiny_plan(), library());
  auto b = a;
  for (auto& c : b)
    for (double& t : c.runtimes) t *= 1000.0;
  EXPECT_EQ(table1_csv(aggregate_table1(a)), table1_csv(aggregate_table1(b)));
}
