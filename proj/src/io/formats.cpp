#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "bssnmr/io.hpp"

namespace bssnmr {

using nlohmann::json;

namespace {

template <class T>
T field(const json& j, const char* name, const std::string& ctx) {
  if (!j.is_object()) throw std::invalid_argument(ctx + ": expected an object");
  auto it = j.find(name);
  if (it == j.end()) throw std::invalid_argument(ctx + ": missing field '" + name + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument(ctx + ": field '" + name + "' has the wrong type");
  }
}

template <class T>
void optional_field(const json& j, const char* name, const std::string& ctx, T& out) {
  if (j.contains(name)) out = field<T>(j, name, ctx);
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& ctx) {
  if (!j.is_object()) throw std::invalid_argument(ctx + ": expected an object");
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw std::invalid_argument(ctx + ": unknown field '" + k + "'");
}

void check_format(const json& j, const std::string& expected) {
  const auto fmt = field<std::string>(j, "format", expected);
  if (fmt != expected) throw std::invalid_argument("expected a " + expected + " file, found '" + fmt + "'");
  const int version = field<int>(j, "format_version", expected);
  if (version != kFormatVersion)
    throw std::invalid_argument(expected + ": unsupported format_version " + std::to_string(version));
}

// A row is either a base64 float64 payload or a plain numeric array.
std::vector<double> row_from_json(const json& j, const std::string& ctx) {
  if (j.is_string()) return decode_doubles(j.get<std::string>());
  if (j.is_array()) {
    try {
      return j.get<std::vector<double>>();
    } catch (const json::exception&) {
      throw std::invalid_argument(ctx + ": non-numeric entry");
    }
  }
  throw std::invalid_argument(ctx + ": expected base64 string or numeric array");
}

Matrix rows_from_json(const json& j, std::size_t expected_cols, const std::string& ctx) {
  if (!j.is_array()) throw std::invalid_argument(ctx + ": expected an array of rows");
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(expected_cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto row = row_from_json(j[r], ctx);
    if (row.size() != expected_cols)
      throw std::invalid_argument(ctx + ": row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                                  " points, expected " + std::to_string(expected_cols));
    for (std::size_t c = 0; c < expected_cols; ++c) m(r, c) = row[c];
  }
  return m;
}

json rows_to_json(const Matrix& m) {
  json out = json::array();
  std::vector<double> row(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[c] = m(r, c);
    out.push_back(encode_doubles(row));
  }
  return out;
}

json vector_to_json(const Vector& v) {
  return encode_doubles(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

Vector vector_from_json(const json& j, const std::string& ctx) {
  const auto v = row_from_json(j, ctx);
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

json to_json(const SpectrumGrid& g) {
  return {{"n_points", g.n_points}, {"sweep_width_hz", g.sweep_width_hz}, {"larmor_hz", g.larmor_hz},
          {"center_hz", g.center_hz}};
}

SpectrumGrid grid_from_json(const json& j) {
  const std::string ctx = "grid";
  reject_unknown(j, {"n_points", "sweep_width_hz", "larmor_hz", "center_hz"}, ctx);
  SpectrumGrid g;
  optional_field(j, "n_points", ctx, g.n_points);
  optional_field(j, "sweep_width_hz", ctx, g.sweep_width_hz);
  optional_field(j, "larmor_hz", ctx, g.larmor_hz);
  optional_field(j, "center_hz", ctx, g.center_hz);
  g.validate();
  return g;
}

json to_json(const QuadrupolarParams& p) {
  return {{"cq_hz", p.cq_hz}, {"eta", p.eta}, {"delta_iso_hz", p.delta_iso_hz}, {"spin", p.spin},
          {"spin_rate_hz", p.spin_rate_hz}, {"gaussian_broaden", p.gaussian_broaden}};
}

QuadrupolarParams params_from_json(const json& j) {
  const std::string ctx = "params";
  reject_unknown(j, {"cq_hz", "eta", "delta_iso_hz", "spin", "spin_rate_hz", "gaussian_broaden"}, ctx);
  QuadrupolarParams p;
  optional_field(j, "cq_hz", ctx, p.cq_hz);
  optional_field(j, "eta", ctx, p.eta);
  optional_field(j, "delta_iso_hz", ctx, p.delta_iso_hz);
  optional_field(j, "spin", ctx, p.spin);
  optional_field(j, "spin_rate_hz", ctx, p.spin_rate_hz);
  optional_field(j, "gaussian_broaden", ctx, p.gaussian_broaden);
  p.validate();
  return p;
}

json to_json(const LibraryGridSpec& s) {
  return {{"cq_steps", s.cq_steps},   {"cq_max_hz", s.cq_max_hz},       {"eta_steps", s.eta_steps},
          {"diso_steps", s.diso_steps}, {"diso_span_hz", s.diso_span_hz}, {"smoothing", s.smoothing},
          {"spin", s.spin},           {"spin_rate_hz", s.spin_rate_hz}};
}

LibraryGridSpec grid_spec_from_json(const json& j) {
  const std::string ctx = "grid spec";
  reject_unknown(j, {"cq_steps", "cq_max_hz", "eta_steps", "diso_steps", "diso_span_hz", "smoothing", "spin",
                     "spin_rate_hz"},
                 ctx);
  LibraryGridSpec s;
  optional_field(j, "cq_steps", ctx, s.cq_steps);
  optional_field(j, "cq_max_hz", ctx, s.cq_max_hz);
  optional_field(j, "eta_steps", ctx, s.eta_steps);
  optional_field(j, "diso_steps", ctx, s.diso_steps);
  optional_field(j, "diso_span_hz", ctx, s.diso_span_hz);
  optional_field(j, "smoothing", ctx, s.smoothing);
  optional_field(j, "spin", ctx, s.spin);
  optional_field(j, "spin_rate_hz", ctx, s.spin_rate_hz);
  s.validate();
  QuadrupolarParams probe = s.point(0, 0, 0, 0);
  try {
    probe.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("grid spec: ") + e.what());
  }
  return s;
}

json to_json(const PureComponent& pc) {
  return {{"id", pc.id}, {"params", to_json(pc.params)}, {"intensity", encode_doubles(pc.intensity)}};
}

PureComponent pure_from_json(const json& j, const SpectrumGrid& grid) {
  PureComponent pc;
  pc.id = field<std::string>(j, "id", "component");
  pc.params = params_from_json(field<json>(j, "params", "component " + pc.id));
  pc.grid = grid;
  pc.intensity = row_from_json(field<json>(j, "intensity", "component " + pc.id), "component " + pc.id);
  if (pc.intensity.size() != static_cast<std::size_t>(grid.n_points))
    throw std::invalid_argument("component " + pc.id + ": intensity length does not match the grid");
  return pc;
}

// ---------------------------------------------------------------------------

std::string library_checksum(std::span<const PureComponent> components) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  auto mix = [&](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) h = (h ^ p[i]) * 0x100000001b3ULL;
  };
  for (const auto& pc : components) {
    mix(pc.id.data(), pc.id.size());
    const std::string payload = encode_doubles(pc.intensity);
    mix(payload.data(), payload.size());
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json to_json(const LibraryFile& lib) {
  json j;
  j["format"] = "bssnmr-library";
  j["format_version"] = kFormatVersion;
  j["manifest"] = {{"version", lib.version},
                   {"grid_spec", to_json(lib.spec)},
                   {"grid", to_json(lib.grid)},
                   {"powder", {{"polar_steps", lib.powder.polar_steps}, {"azimuth_steps", lib.powder.azimuth_steps}}},
                   {"count", lib.components.size()},
                   {"checksum", library_checksum(lib.components)}};
  json comps = json::array();
  for (const auto& pc : lib.components) comps.push_back(to_json(pc));
  j["components"] = std::move(comps);
  return j;
}

LibraryFile library_from_json(const json& j) {
  check_format(j, "bssnmr-library");
  const json& m = field<json>(j, "manifest", "library");
  LibraryFile lib;
  lib.version = field<std::string>(m, "version", "manifest");
  lib.spec = grid_spec_from_json(field<json>(m, "grid_spec", "manifest"));
  lib.grid = grid_from_json(field<json>(m, "grid", "manifest"));
  if (m.contains("powder")) {
    lib.powder.polar_steps = field<int>(m["powder"], "polar_steps", "powder");
    lib.powder.azimuth_steps = field<int>(m["powder"], "azimuth_steps", "powder");
  }
  lib.checksum = field<std::string>(m, "checksum", "manifest");
  const auto count = field<std::size_t>(m, "count", "manifest");
  const json& comps = field<json>(j, "components", "library");
  if (!comps.is_array() || comps.size() != count)
    throw std::invalid_argument("library: component count does not match the manifest");
  lib.components.reserve(count);
  for (const auto& c : comps) lib.components.push_back(pure_from_json(c, lib.grid));
  if (library_checksum(lib.components) != lib.checksum)
    throw std::invalid_argument("library: checksum mismatch");
  return lib;
}

// ---------------------------------------------------------------------------

json to_json(const DatasetFile& f) {
  const MixtureDataset& ds = f.dataset;
  json j;
  j["format"] = "bssnmr-dataset";
  j["format_version"] = kFormatVersion;
  j["grid"] = to_json(ds.grid);
  j["normalization"] = to_string(ds.normalization);
  j["spectra"] = rows_to_json(ds.spectra);
  if (f.has_provenance) {
    json p;
    p["seed"] = ds.seed;
    p["model"] = to_string(ds.model);
    p["noise_factor"] = ds.noise_factor;
    p["axis"] = ds.axis;
    if (ds.signal_to_noise) p["signal_to_noise"] = *ds.signal_to_noise;
    json comps = json::array();
    for (std::size_t i = 0; i < ds.components.size(); ++i) {
      const auto& s = ds.components[i];
      json c = {{"id", s.component_id}, {"amplitude", s.amplitude}, {"t1", s.t1},
                {"frequency", s.frequency}, {"values", s.values}};
      if (i < f.pures.size()) c["pure"] = to_json(f.pures[i]);
      comps.push_back(std::move(c));
    }
    p["components"] = std::move(comps);
    j["provenance"] = std::move(p);
  }
  return j;
}

DatasetFile dataset_from_json(const json& j) {
  check_format(j, "bssnmr-dataset");
  DatasetFile f;
  MixtureDataset& ds = f.dataset;
  ds.grid = grid_from_json(field<json>(j, "grid", "dataset"));
  if (j.contains("normalization")) ds.normalization = parse_normalization(field<std::string>(j, "normalization", "dataset"));
  ds.spectra = rows_from_json(field<json>(j, "spectra", "dataset"), ds.grid.n_points, "dataset spectra");
  if (ds.spectra.rows() < 1) throw std::invalid_argument("dataset: no spectra");
  if (j.contains("provenance") && !j["provenance"].is_null()) {
    const json& p = j["provenance"];
    f.has_provenance = true;
    ds.seed = field<std::uint64_t>(p, "seed", "provenance");
    ds.model = parse_model(field<std::string>(p, "model", "provenance"));
    ds.noise_factor = field<double>(p, "noise_factor", "provenance");
    ds.axis = field<std::vector<double>>(p, "axis", "provenance");
    if (p.contains("signal_to_noise")) ds.signal_to_noise = field<double>(p, "signal_to_noise", "provenance");
    for (const auto& c : field<json>(p, "components", "provenance")) {
      IntensitySeries s;
      s.component_id = field<std::string>(c, "id", "provenance component");
      s.model = ds.model;
      s.amplitude = field<double>(c, "amplitude", "provenance component");
      s.t1 = field<double>(c, "t1", "provenance component");
      s.frequency = field<double>(c, "frequency", "provenance component");
      s.values = field<std::vector<double>>(c, "values", "provenance component");
      if (s.values.size() != static_cast<std::size_t>(ds.spectra.rows()))
        throw std::invalid_argument("provenance component " + s.component_id + ": series length mismatch");
      ds.components.push_back(std::move(s));
      if (c.contains("pure")) f.pures.push_back(pure_from_json(c["pure"], ds.grid));
    }
    if (!f.pures.empty() && f.pures.size() != ds.components.size())
      throw std::invalid_argument("provenance: pure spectra given for only some components");
  }
  return f;
}

std::string dataset_csv(const MixtureDataset& ds) {
  std::ostringstream os;
  os.precision(17);
  os << "frequency_hz";
  for (Eigen::Index r = 0; r < ds.spectra.rows(); ++r) os << ",spectrum_" << r;
  os << '\n';
  for (int c = 0; c < ds.grid.n_points; ++c) {
    os << ds.grid.frequency_hz(c);
    for (Eigen::Index r = 0; r < ds.spectra.rows(); ++r) os << ',' << ds.spectra(r, c);
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------

json to_json(const ComponentSet& set, const SpectrumGrid& grid) {
  json j;
  j["format"] = "bssnmr-components";
  j["format_version"] = kFormatVersion;
  j["grid"] = to_json(grid);
  j["technique"] = set.technique.str();
  j["k_requested"] = set.k_requested;
  j["converged"] = set.converged;
  j["runtime_seconds"] = set.runtime_seconds;
  j["components"] = rows_to_json(set.components);
  j["coefficients"] = rows_to_json(set.coefficients);
  j["row_offset"] = vector_to_json(set.row_offset);
  j["column_offset"] = vector_to_json(set.column_offset);
  j["metadata"] = set.metadata;
  return j;
}

ComponentSet components_from_json(const json& j, SpectrumGrid* grid_out) {
  check_format(j, "bssnmr-components");
  const SpectrumGrid grid = grid_from_json(field<json>(j, "grid", "components"));
  ComponentSet set;
  set.technique = TechniqueId::parse(field<std::string>(j, "technique", "components"));
  set.k_requested = field<int>(j, "k_requested", "components");
  set.converged = field<bool>(j, "converged", "components");
  set.runtime_seconds = field<double>(j, "runtime_seconds", "components");
  set.components = rows_from_json(field<json>(j, "components", "components"), grid.n_points, "components");
  const json& coef = field<json>(j, "coefficients", "components");
  if (!coef.is_array()) throw std::invalid_argument("components: coefficients must be an array");
  set.coefficients =
      rows_from_json(coef, static_cast<std::size_t>(set.components.rows()), "components coefficients");
  set.row_offset = vector_from_json(field<json>(j, "row_offset", "components"), "row_offset");
  set.column_offset = vector_from_json(field<json>(j, "column_offset", "components"), "column_offset");
  if (set.row_offset.size() != 0 && set.row_offset.size() != set.coefficients.rows())
    throw std::invalid_argument("components: row_offset length mismatch");
  if (set.column_offset.size() != 0 && set.column_offset.size() != grid.n_points)
    throw std::invalid_argument("components: column_offset length mismatch");
  if (j.contains("metadata")) set.metadata = j["metadata"];
  if (grid_out) *grid_out = grid;
  return set;
}

std::string components_csv(const ComponentSet& set, const SpectrumGrid& grid) {
  std::ostringstream os;
  os.precision(17);
  os << "frequency_hz";
  for (int r = 0; r < set.k(); ++r) os << ",component_" << r;
  os << '\n';
  for (int c = 0; c < grid.n_points; ++c) {
    os << grid.frequency_hz(c);
    for (int r = 0; r < set.k(); ++r) os << ',' << set.components(r, c);
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------

json to_json(const MatchReport& report, std::span<const PureComponent> pures) {
  json j;
  json pairs = json::array();
  for (const auto& p : report.pairs) {
    json e = {{"predicted", p.predicted}, {"pure", p.pure}, {"offset", p.fit.offset},
              {"multiplier", p.fit.multiplier}, {"lack_of_fit", p.fit.lack_of_fit},
              {"score", 1.0 / std::max(p.fit.lack_of_fit, kZeroFitFloor)}};
    if (static_cast<std::size_t>(p.pure) < pures.size()) e["pure_id"] = pures[p.pure].id;
    pairs.push_back(std::move(e));
  }
  j["pairs"] = std::move(pairs);
  j["ensemble_score"] = report.ensemble_score;
  j["discarded_predicted"] = report.discarded_predicted;
  j["unmatched_pure"] = report.unmatched_pure;
  j["n_points"] = report.n_points;
  j["dataset_error"] = report.dataset_error;
  return j;
}

// ---------------------------------------------------------------------------

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": invalid JSON: " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text, bool force) {
  if (!force && std::filesystem::exists(path))
    throw std::invalid_argument(path.string() + " exists (use --force to overwrite)");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace bssnmr
