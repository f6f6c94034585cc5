// bssnmr command-line front end.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "bssnmr/bench.hpp"
#include "bssnmr/bss.hpp"
#include "bssnmr/errors.hpp"
#include "bssnmr/io.hpp"
#include "bssnmr/lineshape.hpp"
#include "bssnmr/scoring.hpp"
#include "bssnmr/synth.hpp"

namespace fs = std::filesystem;
using namespace bssnmr;

namespace {

enum Exit { kOk = 0, kUsage = 2, kData = 3, kNumerical = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

unsigned default_workers() {
  if (const char* env = std::getenv("BSSNMR_WORKERS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring invalid BSSNMR_WORKERS='" << env << "'\n";
  }
  return 1;
}

// Pure spectra for scoring: a dataset's embedded ground truth or a whole library.
std::vector<PureComponent> load_pures(const fs::path& path) {
  const nlohmann::json j = read_json(path);
  const std::string format = j.value("format", "");
  if (format == "bssnmr-library") return library_from_json(j).components;
  if (format == "bssnmr-dataset") {
    DatasetFile f = dataset_from_json(j);
    if (f.pures.empty()) throw std::invalid_argument(path.string() + ": dataset carries no pure spectra");
    return f.pures;
  }
  throw std::invalid_argument(path.string() + ": expected a library or dataset file");
}

TechniqueId parse_technique(const std::string& s) {
  try {
    return TechniqueId::parse(s);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

struct PureArgs {
  std::string grid_spec, out;
  bool force = false;
  unsigned workers = 1;
};

int cmd_generate_pure(const PureArgs& a) {
  LibraryFile lib;
  if (!a.grid_spec.empty()) {
    nlohmann::json spec = read_json(a.grid_spec);
    if (!spec.is_object()) throw std::invalid_argument("grid spec: expected an object");
    // Acquisition grid and powder quadrature may ride along in the spec file.
    if (spec.contains("grid")) {
      lib.grid = grid_from_json(spec["grid"]);
      spec.erase("grid");
    }
    if (spec.contains("powder")) {
      lib.powder.polar_steps = spec["powder"].value("polar_steps", lib.powder.polar_steps);
      lib.powder.azimuth_steps = spec["powder"].value("azimuth_steps", lib.powder.azimuth_steps);
      if (lib.powder.polar_steps < 1 || lib.powder.azimuth_steps < 1)
        throw std::invalid_argument("grid spec: powder steps must be >= 1");
      spec.erase("powder");
    }
    lib.spec = grid_spec_from_json(spec);
  }
  if (!a.force && fs::exists(a.out)) throw std::invalid_argument(a.out + " exists (use --force to overwrite)");
  lib.components = generate_library(lib.spec, lib.grid, a.workers, lib.powder);
  write_text(a.out, to_json(lib).dump(), true);
  std::cout << "wrote " << lib.components.size() << " components to " << a.out << "\n";
  return kOk;
}

struct MixArgs {
  std::string library, model = "inversion", out;
  double noise = 0.0;
  int count = 1, components = 4;
  std::uint64_t seed = 0;
  bool force = false, csv = false;
};

int cmd_generate_mixtures(const MixArgs& a) {
  IntensityModel model;
  try {
    model = parse_model(a.model);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const LibraryFile lib = library_from_json(read_json(a.library));
  if (lib.components.size() < static_cast<std::size_t>(a.components))
    throw std::invalid_argument("library has fewer components than requested");
  fs::create_directories(a.out);
  for (int i = 0; i < a.count; ++i) {
    const std::uint64_t seed = derive_seed(a.seed, {static_cast<std::uint64_t>(i)});
    DatasetFile f;
    f.pures = sample_components(lib.components, a.components, derive_seed(seed, {0}));
    f.dataset = assemble_dataset(f.pures, model, seed, a.noise);
    f.has_provenance = true;
    char name[32];
    std::snprintf(name, sizeof name, "mixture_%03d", i);
    const fs::path base = fs::path(a.out) / name;
    write_text(fs::path(base).replace_extension(".json"), to_json(f).dump(), a.force);
    if (a.csv) write_text(fs::path(base).replace_extension(".csv"), dataset_csv(f.dataset), a.force);
  }
  std::cout << "wrote " << a.count << " datasets to " << a.out << "\n";
  return kOk;
}

struct DecomposeArgs {
  std::string in, technique, normalization = "none", out, csv;
  int k = 0;
  std::uint64_t seed = 0;
  bool force = false;
};

int cmd_decompose(const DecomposeArgs& a) {
  const TechniqueId tech = parse_technique(a.technique);
  Normalization norm;
  try {
    norm = parse_normalization(a.normalization);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const DatasetFile f = dataset_from_json(read_json(a.in));
  const MixtureDataset ds = normalize(f.dataset, norm);
  ComponentSet set = decompose(ds, tech, a.k, a.seed);
  set.metadata["normalization"] = to_string(norm);
  write_text(a.out, to_json(set, ds.grid).dump(2), a.force);
  if (!a.csv.empty()) write_text(a.csv, components_csv(set, ds.grid), a.force);
  std::cout << "wrote " << set.k() << " components (" << tech.str() << ") to " << a.out << "\n";
  if (!set.converged) std::cerr << "warning: " << tech.str() << " stopped at its iteration limit\n";
  return kOk;
}

struct ScoreArgs {
  std::string predicted, pure, out, svg_dir;
  bool force = false;
};

int cmd_score(const ScoreArgs& a) {
  SpectrumGrid grid;
  const ComponentSet set = components_from_json(read_json(a.predicted), &grid);
  const std::vector<PureComponent> pures = load_pures(a.pure);
  for (const auto& p : pures)
    if (p.intensity.size() != static_cast<std::size_t>(grid.n_points))
      throw std::invalid_argument("predicted and pure spectra have different lengths");
  const MatchReport report = best_assignment(set, pures);
  write_text(a.out, to_json(report, pures).dump(2), a.force);
  if (!a.svg_dir.empty()) {
    fs::create_directories(a.svg_dir);
    for (const auto& pair : report.pairs) {
      const Eigen::RowVectorXd row = set.components.row(pair.predicted);
      const std::vector<double> pred = standardize(std::span<const double>(row.data(), row.size()));
      const auto& pure = pures[pair.pure];
      const std::string name = "pair_" + std::to_string(pair.predicted) + "_" + pure.id + ".svg";
      write_text(fs::path(a.svg_dir) / name,
                 overlay_svg(pred, pure.intensity, pair.fit,
                             "predicted " + std::to_string(pair.predicted) + " vs " + pure.id),
                 a.force);
    }
  }
  std::cout << "matched " << report.pairs.size() << " pairs, dataset_error " << report.dataset_error << "\n";
  return kOk;
}

struct BenchArgs {
  std::string plan, library, out;
  unsigned workers = 1;
  bool resume = false;
};

int cmd_bench(const BenchArgs& a) {
  const BenchmarkPlan plan = a.plan.empty() ? BenchmarkPlan{} : BenchmarkPlan::from_json(read_json(a.plan));
  const LibraryFile lib = library_from_json(read_json(a.library));
  fs::create_directories(a.out);
  RunOptions run;
  run.workers = a.workers;
  run.record_log = fs::path(a.out) / "records.jsonl";
  run.resume = a.resume;
  run.progress = [](std::size_t done, std::size_t total) {
    std::cerr << "\rdatasets " << done << "/" << total << std::flush;
    if (done == total) std::cerr << "\n";
  };
  const auto results = run_plan(plan, LibraryView::of(lib.components), run);
  write_report_bundle(results, a.out);
  write_text(fs::path(a.out) / "plan.json", plan.to_json().dump(2), true);
  std::cout << "wrote report bundle to " << a.out << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blind source separation toolkit for signed spectral datasets"};
  app.require_subcommand(1);

  PureArgs pa;
  auto* gp = app.add_subcommand("generate-pure", "Simulate a pure-component library");
  gp->add_option("--grid-spec", pa.grid_spec, "JSON grid spec (default: full library grid)");
  gp->add_option("--out", pa.out, "Library file")->required();
  gp->add_flag("--force", pa.force, "Overwrite an existing file");
  gp->add_option("--workers", pa.workers, "Worker threads")->check(CLI::PositiveNumber);

  MixArgs ma;
  auto* gm = app.add_subcommand("generate-mixtures", "Synthesize mixture datasets from a library");
  gm->add_option("--library", ma.library, "Library file")->required();
  gm->add_option("--model", ma.model, "inversion | nutation");
  gm->add_option("--noise", ma.noise, "Gaussian noise standard deviation")->check(CLI::NonNegativeNumber);
  gm->add_option("--count", ma.count, "Number of datasets")->check(CLI::PositiveNumber);
  gm->add_option("--components", ma.components, "Components per dataset")
      ->check(CLI::Range(kMinComponents, kMaxComponents));
  gm->add_option("--seed", ma.seed, "Master seed");
  gm->add_option("--out", ma.out, "Output directory")->required();
  gm->add_flag("--force", ma.force, "Overwrite existing files");
  gm->add_flag("--csv", ma.csv, "Also write CSV copies");

  DecomposeArgs da;
  auto* dc = app.add_subcommand("decompose", "Separate a dataset into components");
  dc->add_option("--in", da.in, "Dataset file")->required();
  dc->add_option("--technique", da.technique, "Technique id; one of: " + TechniqueId::roster_text())->required();
  dc->add_option("--k", da.k, "Number of components")->required()->check(CLI::PositiveNumber);
  dc->add_option("--normalization", da.normalization, "none | peak | area");
  dc->add_option("--seed", da.seed, "Seed for randomized techniques");
  dc->add_option("--out", da.out, "Component file")->required();
  dc->add_option("--csv", da.csv, "Also write components as CSV");
  dc->add_flag("--force", da.force, "Overwrite existing files");

  ScoreArgs sa;
  auto* sc = app.add_subcommand("score", "Match predicted components to pure components");
  sc->add_option("--predicted", sa.predicted, "Component file")->required();
  sc->add_option("--pure", sa.pure, "Dataset with ground truth, or library file")->required();
  sc->add_option("--out", sa.out, "Report file")->required();
  sc->add_option("--svg-dir", sa.svg_dir, "Write overlay plots here");
  sc->add_flag("--force", sa.force, "Overwrite existing files");

  BenchArgs ba;
  ba.workers = default_workers();
  auto* bn = app.add_subcommand("bench", "Run a benchmark plan");
  bn->add_option("--plan", ba.plan, "Plan JSON (default: full 720-dataset plan)");
  bn->add_option("--library", ba.library, "Library file")->required();
  bn->add_option("--out", ba.out, "Report directory")->required();
  bn->add_option("--workers", ba.workers, "Worker threads (default $BSSNMR_WORKERS or 1)")
      ->check(CLI::PositiveNumber);
  bn->add_flag("--resume", ba.resume, "Reuse records from an interrupted run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*gp) return cmd_generate_pure(pa);
    if (*gm) return cmd_generate_mixtures(ma);
    if (*dc) return cmd_decompose(da);
    if (*sc) return cmd_score(sa);
    if (*bn) return cmd_bench(ba);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const TechniqueFailure& e) {
    std::cerr << "technique failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const UndefinedErrorSignal& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
