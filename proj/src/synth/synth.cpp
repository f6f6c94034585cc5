#include "bssnmr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bssnmr {

std::string to_string(IntensityModel m) { return m == IntensityModel::inversion ? "inversion" : "nutation"; }

std::string to_string(Normalization n) {
  switch (n) {
    case Normalization::none: return "none";
    case Normalization::peak: return "peak";
    case Normalization::area: return "area";
  }
  return "none";
}

IntensityModel parse_model(const std::string& s) {
  if (s == "inversion") return IntensityModel::inversion;
  if (s == "nutation") return IntensityModel::nutation;
  throw std::invalid_argument("unknown intensity model '" + s + "' (expected inversion|nutation)");
}

Normalization parse_normalization(const std::string& s) {
  if (s == "none") return Normalization::none;
  if (s == "peak") return Normalization::peak;
  if (s == "area") return Normalization::area;
  throw std::invalid_argument("unknown normalization '" + s + "' (expected none|peak|area)");
}

std::vector<std::size_t> sample_indices(std::size_t library_size, std::size_t k, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("sample: k must be >= 1");
  if (k > library_size) throw std::invalid_argument("sample: k exceeds library size");
  Rng rng(seed);
  std::vector<std::size_t> reservoir(k);
  for (std::size_t i = 0; i < library_size; ++i) {
    if (i < k) {
      reservoir[i] = i;
    } else {
      const std::size_t j = rng.below(i + 1);
      if (j < k) reservoir[j] = i;
    }
  }
  return reservoir;
}

std::vector<PureComponent> sample_components(std::span<const PureComponent> library, std::size_t k,
                                             std::uint64_t seed) {
  std::vector<PureComponent> out;
  for (std::size_t i : sample_indices(library.size(), k, seed)) out.push_back(library[i]);
  return out;
}

std::vector<double> inversion_profile(double amplitude, double t1, std::span<const double> taus) {
  if (!(t1 > 0.0)) throw std::invalid_argument("inversion_profile: T1 must be positive");
  if (!(amplitude > 0.0)) throw std::invalid_argument("inversion_profile: amplitude must be positive");
  std::vector<double> out;
  out.reserve(taus.size());
  double prev = -1.0;
  for (double tau : taus) {
    if (!(tau >= 0.0) || tau < prev) throw std::invalid_argument("inversion_profile: taus must be nonnegative ascending");
    prev = tau;
    out.push_back(amplitude * (1.0 - 2.0 * std::exp(-tau / t1)));
  }
  return out;
}

std::vector<double> nutation_profile(double amplitude, double frequency, std::span<const double> pulses) {
  if (!(amplitude > 0.0)) throw std::invalid_argument("nutation_profile: amplitude must be positive");
  std::vector<double> out;
  out.reserve(pulses.size());
  for (double p : pulses) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("nutation_profile: pulse outside [0, 1]");
    out.push_back(amplitude * std::cos(2.0 * std::numbers::pi * frequency * p));
  }
  return out;
}

Matrix pure_matrix(std::span<const PureComponent> pures) {
  if (pures.empty()) return Matrix();
  const auto n = static_cast<Eigen::Index>(pures.front().intensity.size());
  Matrix m(static_cast<Eigen::Index>(pures.size()), n);
  for (std::size_t i = 0; i < pures.size(); ++i) {
    if (static_cast<Eigen::Index>(pures[i].intensity.size()) != n)
      throw std::invalid_argument("pure components have different lengths");
    for (Eigen::Index j = 0; j < n; ++j) m(static_cast<Eigen::Index>(i), j) = pures[i].intensity[j];
  }
  return m;
}

Matrix weight_matrix(const MixtureDataset& ds) {
  const Eigen::Index rows = ds.components.empty() ? ds.spectra.rows()
                                                  : static_cast<Eigen::Index>(ds.components.front().values.size());
  Matrix w(rows, static_cast<Eigen::Index>(ds.components.size()));
  for (std::size_t c = 0; c < ds.components.size(); ++c)
    for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, static_cast<Eigen::Index>(c)) = ds.components[c].values[r];
  return w;
}

MixtureDataset assemble_dataset(std::span<const PureComponent> pures, IntensityModel model,
                                std::uint64_t seed, double noise_factor) {
  const int k = static_cast<int>(pures.size());
  if (k < kMinComponents || k > kMaxComponents)
    throw std::invalid_argument("assemble_dataset: component count must be in [2, 10]");
  if (!(noise_factor >= 0.0) || !std::isfinite(noise_factor))
    throw std::invalid_argument("assemble_dataset: noise_factor must be >= 0");
  const SpectrumGrid grid = pures.front().grid;
  for (const auto& p : pures) {
    if (!(p.grid == grid) || static_cast<int>(p.intensity.size()) != grid.n_points)
      throw std::invalid_argument("assemble_dataset: pure components must share one grid");
  }

  // Parameters and noise draw from separate streams so the same seed gives
  // the same mixture at every noise level.
  Rng prng(derive_seed(seed, {1}));
  Rng nrng(derive_seed(seed, {2}));
  constexpr int rows = kSpectraPerDataset;

  MixtureDataset ds;
  ds.grid = grid;
  ds.model = model;
  ds.noise_factor = noise_factor;
  ds.seed = seed;
  ds.axis.resize(rows);

  if (model == IntensityModel::inversion) {
    std::vector<double> t1(k), amp(k);
    for (int i = 0; i < k; ++i) t1[i] = prng.uniform(0.5, 2.0);
    do {
      for (int i = 0; i < k; ++i) amp[i] = prng.uniform(0.2, 1.0);
    } while (*std::min_element(amp.begin(), amp.end()) < 0.2 * *std::max_element(amp.begin(), amp.end()));
    const double tau_max = kFullRecoveryFactor * *std::max_element(t1.begin(), t1.end());
    for (int j = 0; j < rows; ++j) ds.axis[j] = (j + 1) * tau_max / rows;
    for (int i = 0; i < k; ++i) {
      IntensitySeries s;
      s.component_id = pures[i].id;
      s.model = model;
      s.amplitude = amp[i];
      s.t1 = t1[i];
      s.values = inversion_profile(amp[i], t1[i], ds.axis);
      ds.components.push_back(std::move(s));
    }
  } else {
    for (int j = 0; j < rows; ++j) ds.axis[j] = static_cast<double>(j) / (rows - 1);
    for (int i = 0; i < k; ++i) {
      IntensitySeries s;
      s.component_id = pures[i].id;
      s.model = model;
      s.frequency = i == 0 ? 0.5 : 0.5 + 0.25 * (1.0 - prng.uniform());
      s.amplitude = 1.0 - prng.uniform();
      s.values = nutation_profile(s.amplitude, s.frequency, ds.axis);
      ds.components.push_back(std::move(s));
    }
  }

  ds.spectra = weight_matrix(ds) * pure_matrix(pures);
  if (noise_factor > 0.0) {
    Matrix noise(ds.spectra.rows(), ds.spectra.cols());
    for (Eigen::Index r = 0; r < noise.rows(); ++r)
      for (Eigen::Index c = 0; c < noise.cols(); ++c) noise(r, c) = noise_factor * nrng.gaussian();
    ds.signal_to_noise = ds.spectra.cwiseAbs().sum() / noise.cwiseAbs().sum();
    ds.spectra += noise;
  }
  return ds;
}

MixtureDataset normalize(const MixtureDataset& ds, Normalization mode) {
  MixtureDataset out = ds;
  out.normalization = mode;
  if (mode == Normalization::none) return out;
  for (Eigen::Index r = 0; r < out.spectra.rows(); ++r) {
    const double scale = mode == Normalization::peak ? out.spectra.row(r).cwiseAbs().maxCoeff()
                                                      : out.spectra.row(r).cwiseAbs().sum();
    if (scale == 0.0) throw DegenerateRowError(static_cast<std::size_t>(r));
    out.spectra.row(r) /= scale;
  }
  return out;
}

}  // namespace bssnmr
