#include "bssnmr/bench.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "bssnmr/errors.hpp"

namespace bssnmr {

std::string to_string(ComponentMode m) {
  switch (m) {
    case ComponentMode::fixed4: return "fixed4";
    case ComponentMode::fixed6: return "fixed6";
    case ComponentMode::random2to10: return "random2to10";
  }
  return "?";
}

ComponentMode parse_component_mode(const std::string& s) {
  if (s == "fixed4") return ComponentMode::fixed4;
  if (s == "fixed6") return ComponentMode::fixed6;
  if (s == "random2to10") return ComponentMode::random2to10;
  throw std::invalid_argument("unknown component mode '" + s + "' (fixed4, fixed6, random2to10)");
}

// ---------------------------------------------------------------------------
// Plan

std::size_t BenchmarkPlan::dataset_count() const {
  return models.size() * noise_levels.size() * component_modes.size() * static_cast<std::size_t>(n_datasets_per_cell);
}

std::size_t BenchmarkPlan::decomposition_count() const {
  return dataset_count() * normalizations.size() * techniques.size() * k_offsets.size();
}

void BenchmarkPlan::validate() const {
  if (n_datasets_per_cell < 1) throw std::invalid_argument("plan: n_datasets_per_cell must be >= 1");
  if (component_modes.empty()) throw std::invalid_argument("plan: component_modes must be non-empty");
  if (models.empty()) throw std::invalid_argument("plan: models must be non-empty");
  if (noise_levels.empty()) throw std::invalid_argument("plan: noise_levels must be non-empty");
  for (double n : noise_levels)
    if (!(n >= 0.0) || !std::isfinite(n)) throw std::invalid_argument("plan: noise_levels must be finite and >= 0");
  if (normalizations.empty()) throw std::invalid_argument("plan: normalizations must be non-empty");
  if (techniques.empty()) throw std::invalid_argument("plan: techniques must be non-empty");
  if (std::find(k_offsets.begin(), k_offsets.end(), 0) == k_offsets.end())
    throw std::invalid_argument("plan: k_offsets must contain 0");
  auto dup = [](auto v) {
    std::sort(v.begin(), v.end());
    return std::adjacent_find(v.begin(), v.end()) != v.end();
  };
  if (dup(k_offsets) || dup(noise_levels) || dup(models) || dup(component_modes) || dup(normalizations) ||
      dup(techniques))
    throw std::invalid_argument("plan: list entries must be distinct");
}

nlohmann::json BenchmarkPlan::to_json() const {
  nlohmann::json j;
  j["master_seed"] = master_seed;
  j["n_datasets_per_cell"] = n_datasets_per_cell;
  for (auto m : component_modes) j["component_modes"].push_back(to_string(m));
  for (auto m : models) j["models"].push_back(to_string(m));
  j["noise_levels"] = noise_levels;
  for (auto n : normalizations) j["normalizations"].push_back(to_string(n));
  for (const auto& t : techniques) j["techniques"].push_back(t.str());
  j["k_offsets"] = k_offsets;
  return j;
}

BenchmarkPlan BenchmarkPlan::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("plan: expected a JSON object");
  static const std::set<std::string> known{"master_seed", "n_datasets_per_cell", "component_modes", "models",
                                           "noise_levels", "normalizations", "techniques", "k_offsets"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw std::invalid_argument("plan: unknown field '" + k + "'");

  BenchmarkPlan p;
  auto field = [&](const char* name, auto fn) {
    if (!j.contains(name)) return;
    try {
      fn(j.at(name));
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(std::string("plan: bad field '") + name + "': " + e.what());
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string("plan: bad field '") + name + "': " + e.what());
    }
  };
  field("master_seed", [&](const auto& v) { p.master_seed = v.template get<std::uint64_t>(); });
  field("n_datasets_per_cell", [&](const auto& v) { p.n_datasets_per_cell = v.template get<int>(); });
  field("component_modes", [&](const auto& v) {
    p.component_modes.clear();
    for (const auto& s : v) p.component_modes.push_back(parse_component_mode(s.template get<std::string>()));
  });
  field("models", [&](const auto& v) {
    p.models.clear();
    for (const auto& s : v) p.models.push_back(parse_model(s.template get<std::string>()));
  });
  field("noise_levels", [&](const auto& v) { p.noise_levels = v.template get<std::vector<double>>(); });
  field("normalizations", [&](const auto& v) {
    p.normalizations.clear();
    for (const auto& s : v) p.normalizations.push_back(parse_normalization(s.template get<std::string>()));
  });
  field("techniques", [&](const auto& v) {
    p.techniques.clear();
    for (const auto& s : v) p.techniques.push_back(TechniqueId::parse(s.template get<std::string>()));
  });
  field("k_offsets", [&](const auto& v) { p.k_offsets = v.template get<std::vector<int>>(); });
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------
// Library access

LibraryView LibraryView::of(const std::vector<PureComponent>& components) {
  return {components.size(), [&components](std::size_t i) { return components.at(i); }};
}

LibraryView LibraryView::of(const LibraryGridSpec& spec, const SpectrumGrid& grid, const PowderOptions& powder) {
  spec.validate();
  grid.validate();
  struct Cache {
    std::mutex mu;
    std::map<std::size_t, PureComponent> items;
  };
  auto cache = std::make_shared<Cache>();
  return {spec.size(), [cache, spec, grid, powder](std::size_t i) {
            {
              std::lock_guard lock(cache->mu);
              auto it = cache->items.find(i);
              if (it != cache->items.end()) return it->second;
            }
            PureComponent pc = library_component(spec, grid, i, powder);
            std::lock_guard lock(cache->mu);
            return cache->items.emplace(i, std::move(pc)).first->second;
          }};
}

// ---------------------------------------------------------------------------
// Datasets

std::uint64_t dataset_seed(std::uint64_t master_seed, const DatasetKey& key) {
  return derive_seed(master_seed, {static_cast<std::uint64_t>(key.model), std::bit_cast<std::uint64_t>(key.noise),
                                   static_cast<std::uint64_t>(key.mode), static_cast<std::uint64_t>(key.index)});
}

MixtureDataset make_dataset(const BenchmarkPlan& plan, const DatasetKey& key, const LibraryView& library,
                            std::vector<PureComponent>* pures_out) {
  const std::uint64_t seed = dataset_seed(plan.master_seed, key);
  int k = 4;
  switch (key.mode) {
    case ComponentMode::fixed4: k = 4; break;
    case ComponentMode::fixed6: k = 6; break;
    case ComponentMode::random2to10: {
      Rng rng(derive_seed(seed, {10}));
      k = kMinComponents + static_cast<int>(rng.below(kMaxComponents - kMinComponents + 1));
      break;
    }
  }
  if (library.size < static_cast<std::size_t>(k))
    throw std::invalid_argument("library has fewer components than a dataset needs");
  std::vector<PureComponent> pures;
  for (std::size_t i : sample_indices(library.size, k, derive_seed(seed, {11}))) pures.push_back(library.at(i));
  MixtureDataset ds = assemble_dataset(pures, key.model, derive_seed(seed, {12}), key.noise);
  if (pures_out) *pures_out = std::move(pures);
  return ds;
}

// ---------------------------------------------------------------------------
// Records

nlohmann::json RunRecord::to_json() const {
  nlohmann::json j;
  j["model"] = to_string(dataset.model);
  j["noise"] = dataset.noise;
  j["mode"] = to_string(dataset.mode);
  j["index"] = dataset.index;
  j["normalization"] = to_string(normalization);
  j["technique"] = technique;
  j["k_offset"] = k_offset;
  j["true_k"] = true_k;
  j["k"] = k;
  j["clamped"] = clamped;
  j["ok"] = ok;
  if (ok) {
    j["error"] = error;
    j["ensemble_score"] = ensemble_score;
    j["converged"] = converged;
    nlohmann::json pj = nlohmann::json::array();
    for (const auto& p : pairs)
      pj.push_back({p.predicted, p.pure, p.fit.offset, p.fit.multiplier, p.fit.lack_of_fit});
    j["pairs"] = pj;
  } else {
    j["failure"] = failure;
  }
  j["runtime_seconds"] = runtime_seconds;
  return j;
}

RunRecord RunRecord::from_json(const nlohmann::json& j) {
  RunRecord r;
  r.dataset.model = parse_model(j.at("model").get<std::string>());
  r.dataset.noise = j.at("noise").get<double>();
  r.dataset.mode = parse_component_mode(j.at("mode").get<std::string>());
  r.dataset.index = j.at("index").get<int>();
  r.normalization = parse_normalization(j.at("normalization").get<std::string>());
  r.technique = j.at("technique").get<std::string>();
  r.k_offset = j.at("k_offset").get<int>();
  r.true_k = j.at("true_k").get<int>();
  r.k = j.at("k").get<int>();
  r.clamped = j.at("clamped").get<bool>();
  r.ok = j.at("ok").get<bool>();
  if (r.ok) {
    r.error = j.at("error").get<double>();
    r.ensemble_score = j.at("ensemble_score").get<double>();
    r.converged = j.at("converged").get<bool>();
    for (const auto& p : j.at("pairs")) {
      MatchedPair mp;
      mp.predicted = p.at(0).get<int>();
      mp.pure = p.at(1).get<int>();
      mp.fit = {p.at(2).get<double>(), p.at(3).get<double>(), p.at(4).get<double>()};
      r.pairs.push_back(mp);
    }
  } else {
    r.failure = j.value("failure", std::string());
  }
  r.runtime_seconds = j.value("runtime_seconds", 0.0);
  return r;
}

std::vector<RunRecord> read_record_log(const std::filesystem::path& path) {
  std::vector<RunRecord> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(RunRecord::from_json(nlohmann::json::parse(line)));
    } catch (const std::exception&) {
      // An interrupted writer leaves at most one partial trailing line.
      if (in.peek() != std::char_traits<char>::eof()) throw std::invalid_argument("corrupt record log " + path.string());
    }
  }
  return out;
}

namespace {

using RecordId = std::tuple<DatasetKey, Normalization, std::string, int>;

RecordId id_of(const RunRecord& r) { return {r.dataset, r.normalization, r.technique, r.k_offset}; }

std::vector<DatasetKey> dataset_keys(const BenchmarkPlan& plan) {
  std::vector<DatasetKey> keys;
  for (auto model : plan.models)
    for (double noise : plan.noise_levels)
      for (auto mode : plan.component_modes)
        for (int i = 0; i < plan.n_datasets_per_cell; ++i) keys.push_back({model, noise, mode, i});
  return keys;
}

// All decompositions of one dataset that are not already in `done`.
std::vector<RunRecord> run_dataset(const BenchmarkPlan& plan, const DatasetKey& key, const LibraryView& library,
                                   const std::set<RecordId>& done) {
  std::vector<RunRecord> out;
  std::vector<RunRecord> pending;
  for (auto norm : plan.normalizations)
    for (const auto& tech : plan.techniques)
      for (int off : plan.k_offsets) {
        RunRecord r;
        r.dataset = key;
        r.normalization = norm;
        r.technique = tech.str();
        r.k_offset = off;
        if (!done.count(id_of(r))) pending.push_back(std::move(r));
      }
  if (pending.empty()) return out;

  std::vector<PureComponent> pures;
  const MixtureDataset raw = make_dataset(plan, key, library, &pures);
  const Matrix pure_rows = pure_matrix(pures);
  const int true_k = static_cast<int>(pures.size());
  const std::uint64_t technique_seed = derive_seed(dataset_seed(plan.master_seed, key), {20});

  std::map<Normalization, std::optional<MixtureDataset>> normalized;
  std::map<Normalization, std::string> norm_failure;
  for (auto norm : plan.normalizations) {
    try {
      normalized[norm] = normalize(raw, norm);
    } catch (const std::exception& e) {
      normalized[norm] = std::nullopt;
      norm_failure[norm] = e.what();
    }
  }

  for (RunRecord& r : pending) {
    r.true_k = true_k;
    r.clamped = true_k + r.k_offset < 1;
    r.k = std::max(1, true_k + r.k_offset);
    const auto& ds = normalized.at(r.normalization);
    if (!ds) {
      r.failure = "normalization: " + norm_failure.at(r.normalization);
      out.push_back(std::move(r));
      continue;
    }
    try {
      const ComponentSet set = decompose(*ds, TechniqueId::parse(r.technique), r.k, technique_seed, plan.options);
      r.runtime_seconds = set.runtime_seconds;
      r.converged = set.converged;
      const MatchReport report = best_assignment(set.components, pure_rows);
      r.pairs = report.pairs;
      r.ensemble_score = report.ensemble_score;
      r.error = report.dataset_error;
      r.ok = std::isfinite(r.error);
      if (!r.ok) r.failure = "non-finite error";
    } catch (const std::exception& e) {
      r.ok = false;
      r.failure = e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

std::vector<RunRecord> run_records(const BenchmarkPlan& plan, const LibraryView& library, const RunOptions& run) {
  plan.validate();
  if (library.size == 0) throw std::invalid_argument("bench: library is empty");

  const std::vector<DatasetKey> keys = dataset_keys(plan);
  std::vector<RunRecord> previous;
  std::set<RecordId> done;
  if (!run.record_log.empty()) {
    if (run.resume) {
      std::set<DatasetKey> wanted(keys.begin(), keys.end());
      std::set<std::string> techniques;
      for (const auto& t : plan.techniques) techniques.insert(t.str());
      auto in_plan = [&](const RunRecord& r) {
        return wanted.count(r.dataset) && techniques.count(r.technique) &&
               std::count(plan.normalizations.begin(), plan.normalizations.end(), r.normalization) &&
               std::count(plan.k_offsets.begin(), plan.k_offsets.end(), r.k_offset);
      };
      for (auto& r : read_record_log(run.record_log)) {
        if (!in_plan(r)) continue;
        if (done.insert(id_of(r)).second) previous.push_back(std::move(r));
      }
      // Rewrite cleanly so a partial trailing line does not linger.
      std::ofstream rewrite(run.record_log, std::ios::trunc);
      for (const auto& r : previous) rewrite << r.to_json().dump() << '\n';
    } else {
      std::ofstream truncate(run.record_log, std::ios::trunc);
    }
  }

  std::vector<std::vector<RunRecord>> per_dataset(keys.size());
  std::mutex mu;
  std::ofstream log;
  if (!run.record_log.empty()) log.open(run.record_log, std::ios::app);
  std::atomic<std::size_t> next{0};
  std::size_t finished = 0;
  std::exception_ptr fatal;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= keys.size()) return;
      try {
        auto recs = run_dataset(plan, keys[i], library, done);
        std::lock_guard lock(mu);
        if (log.is_open()) {
          for (const auto& r : recs) log << r.to_json().dump() << '\n';
          log.flush();
        }
        per_dataset[i] = std::move(recs);
        ++finished;
        if (run.progress) run.progress(finished, keys.size());
      } catch (...) {
        std::lock_guard lock(mu);
        if (!fatal) fatal = std::current_exception();
        next.store(keys.size());
        return;
      }
    }
  };

  const unsigned workers = std::max(1u, run.workers);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (fatal) std::rethrow_exception(fatal);

  std::vector<RunRecord> all = std::move(previous);
  for (auto& v : per_dataset)
    for (auto& r : v) all.push_back(std::move(r));
  return all;
}

std::vector<CellResult> group_records(std::vector<RunRecord> records) {
  auto cell_of = [](const RunRecord& r) {
    return CellKey{r.dataset.model, r.dataset.noise, r.normalization, r.dataset.mode, r.technique, r.k_offset};
  };
  std::sort(records.begin(), records.end(), [&](const RunRecord& a, const RunRecord& b) {
    const CellKey ka = cell_of(a), kb = cell_of(b);
    return std::tie(ka, a.dataset.index) < std::tie(kb, b.dataset.index);
  });
  std::vector<CellResult> out;
  for (const auto& r : records) {
    const CellKey key = cell_of(r);
    if (out.empty() || !(out.back().key == key)) out.push_back(CellResult{key, {}, {}, 0, 0, {}});
    CellResult& c = out.back();
    if (r.ok) {
      c.dataset_index.push_back(r.dataset.index);
      c.errors.push_back(r.error);
    } else {
      ++c.failures;
    }
    if (r.clamped) ++c.clamped;
    c.runtimes.push_back(r.runtime_seconds);
  }
  return out;
}

std::vector<CellResult> run_plan(const BenchmarkPlan& plan, const LibraryView& library, const RunOptions& run) {
  return group_records(run_records(plan, library, run));
}

// ---------------------------------------------------------------------------
// Aggregates

namespace {

int roster_rank(const std::string& technique) {
  static const std::vector<TechniqueId> roster = TechniqueId::roster();
  for (std::size_t i = 0; i < roster.size(); ++i)
    if (roster[i].str() == technique) return static_cast<int>(i);
  return static_cast<int>(roster.size());
}

std::string group_of(const std::string& technique) { return TechniqueId::parse(technique).group(); }

int group_rank(const std::string& group) {
  static const std::vector<TechniqueId> roster = TechniqueId::roster();
  for (std::size_t i = 0; i < roster.size(); ++i)
    if (roster[i].group() == group) return static_cast<int>(i);
  return static_cast<int>(roster.size());
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

int runtime_factor(const std::vector<double>& runtimes) {
  std::map<int, int> buckets;
  for (double t : runtimes)
    if (t > 0.0 && std::isfinite(t)) ++buckets[static_cast<int>(std::floor(std::log10(t)))];
  if (buckets.empty()) return 0;
  int best = buckets.begin()->first, count = buckets.begin()->second;
  for (const auto& [decade, c] : buckets)
    if (c > count) best = decade, count = c;
  return best;
}

std::vector<Table1Row> aggregate_table1(const std::vector<CellResult>& results) {
  std::map<std::tuple<int, std::string, Normalization>, std::pair<Table1Row, std::pair<std::vector<double>, std::vector<double>>>> acc;
  for (const auto& c : results) {
    if (c.key.k_offset != 0) continue;
    auto& [row, data] = acc[{roster_rank(c.key.technique), c.key.technique, c.key.normalization}];
    row.technique = c.key.technique;
    row.normalization = c.key.normalization;
    row.failures += c.failures;
    data.first.insert(data.first.end(), c.errors.begin(), c.errors.end());
    data.second.insert(data.second.end(), c.runtimes.begin(), c.runtimes.end());
  }
  std::vector<Table1Row> out;
  for (auto& [key, entry] : acc) {
    auto& [row, data] = entry;
    const auto& errs = data.first;
    row.n = static_cast<int>(errs.size());
    row.mean = mean_of(errs);
    row.min = errs.empty() ? std::nan("") : *std::min_element(errs.begin(), errs.end());
    row.max = errs.empty() ? std::nan("") : *std::max_element(errs.begin(), errs.end());
    row.runtime_factor = runtime_factor(data.second);
    out.push_back(row);
  }
  return out;
}

std::vector<Table2Row> aggregate_table2(const std::vector<CellResult>& results) {
  // Exact-k errors per (cell without offset) and dataset index.
  auto base_key = [](CellKey k) {
    k.k_offset = 0;
    return k;
  };
  std::map<CellKey, std::map<int, double>> exact;
  for (const auto& c : results)
    if (c.key.k_offset == 0)
      for (std::size_t i = 0; i < c.errors.size(); ++i) exact[c.key][c.dataset_index[i]] = c.errors[i];

  std::map<std::pair<int, std::string>, std::map<int, std::pair<std::vector<double>, std::vector<double>>>> acc;
  for (const auto& c : results) {
    auto it = exact.find(base_key(c.key));
    if (it == exact.end()) continue;
    auto& slot = acc[{group_rank(group_of(c.key.technique)), group_of(c.key.technique)}][c.key.k_offset];
    for (std::size_t i = 0; i < c.errors.size(); ++i) {
      auto e = it->second.find(c.dataset_index[i]);
      if (e == it->second.end()) continue;
      slot.first.push_back(e->second);
      slot.second.push_back(c.errors[i]);
    }
  }
  std::vector<Table2Row> out;
  for (const auto& [key, offsets] : acc) {
    Table2Row row;
    row.group = key.second;
    for (const auto& [off, lists] : offsets) {
      row.n[off] = static_cast<int>(lists.first.size());
      try {
        row.ratio[off] = overprediction_ratio(lists.first, lists.second);
      } catch (const UndefinedErrorSignal&) {
        row.ratio[off] = std::nan("");
      }
    }
    out.push_back(row);
  }
  return out;
}

std::vector<Table3Row> aggregate_table3(const std::vector<CellResult>& results) {
  std::map<std::pair<int, std::string>, std::map<double, std::vector<double>>> acc;
  for (const auto& c : results) {
    if (c.key.k_offset != 0 || c.key.normalization != Normalization::none) continue;
    auto& v = acc[{group_rank(group_of(c.key.technique)), group_of(c.key.technique)}][c.key.noise];
    v.insert(v.end(), c.errors.begin(), c.errors.end());
  }
  std::vector<Table3Row> out;
  for (const auto& [key, levels] : acc) {
    Table3Row row;
    row.group = key.second;
    for (const auto& [noise, errs] : levels) {
      row.mean[noise] = mean_of(errs);
      row.n[noise] = static_cast<int>(errs.size());
    }
    out.push_back(row);
  }
  return out;
}

std::string table1_csv(const std::vector<Table1Row>& rows) {
  std::ostringstream os;
  os << "technique,normalization,n,failures,mean,min,max\n";
  for (const auto& r : rows)
    os << r.technique << ',' << to_string(r.normalization) << ',' << r.n << ',' << r.failures << ',' << fmt(r.mean)
       << ',' << fmt(r.min) << ',' << fmt(r.max) << '\n';
  return os.str();
}

std::string table2_csv(const std::vector<Table2Row>& rows) {
  std::set<int> offsets;
  for (const auto& r : rows)
    for (const auto& [o, v] : r.ratio) offsets.insert(o);
  std::ostringstream os;
  os << "group";
  for (int o : offsets) os << ',' << (o == 0 ? std::string("exact") : (o > 0 ? "+" : "") + std::to_string(o));
  os << '\n';
  for (const auto& r : rows) {
    os << r.group;
    for (int o : offsets) {
      auto it = r.ratio.find(o);
      os << ',' << (it == r.ratio.end() ? std::string() : fmt(it->second));
    }
    os << '\n';
  }
  return os.str();
}

std::string table3_csv(const std::vector<Table3Row>& rows) {
  std::set<double> levels;
  for (const auto& r : rows)
    for (const auto& [n, v] : r.mean) levels.insert(n);
  std::ostringstream os;
  os << "group";
  for (double n : levels) os << ",noise=" << fmt(n);
  os << '\n';
  for (const auto& r : rows) {
    os << r.group;
    for (double n : levels) {
      auto it = r.mean.find(n);
      os << ',' << (it == r.mean.end() ? std::string() : fmt(it->second));
    }
    os << '\n';
  }
  return os.str();
}

std::string runtimes_csv(const std::vector<CellResult>& results) {
  std::map<std::pair<int, std::string>, std::vector<double>> acc;
  for (const auto& c : results) {
    auto& v = acc[{roster_rank(c.key.technique), c.key.technique}];
    v.insert(v.end(), c.runtimes.begin(), c.runtimes.end());
  }
  std::ostringstream os;
  os << "technique,runs,median_seconds,runtime_factor\n";
  for (auto& [key, v] : acc) {
    std::sort(v.begin(), v.end());
    const double median = v.empty() ? std::nan("") : v[v.size() / 2];
    os << key.second << ',' << v.size() << ',' << fmt(median) << ',' << runtime_factor(v) << '\n';
  }
  return os.str();
}

void write_report_bundle(const std::vector<CellResult>& results, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto put = [&](const char* name, const std::string& text) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    f << text;
  };
  put("table1.csv", table1_csv(aggregate_table1(results)));
  put("table2.csv", table2_csv(aggregate_table2(results)));
  put("table3.csv", table3_csv(aggregate_table3(results)));
  put("runtimes.csv", runtimes_csv(results));
}

}  // namespace bssnmr
