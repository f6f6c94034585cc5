#include "bssnmr/lineshape.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace bssnmr {

void SpectrumGrid::validate() const {
  if (n_points < 2) throw std::invalid_argument("grid: n_points must be >= 2");
  if (!(sweep_width_hz > 0.0) || !std::isfinite(sweep_width_hz))
    throw std::invalid_argument("grid: sweep_width_hz must be positive");
  if (!(larmor_hz > 0.0) || !std::isfinite(larmor_hz))
    throw std::invalid_argument("grid: larmor_hz must be positive");
  if (!std::isfinite(center_hz)) throw std::invalid_argument("grid: center_hz must be finite");
}

void QuadrupolarParams::validate() const {
  if (!(cq_hz >= 0.0) || !std::isfinite(cq_hz)) throw std::invalid_argument("params: cq_hz must be >= 0");
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("params: eta must lie in [0, 1]");
  if (!std::isfinite(delta_iso_hz)) throw std::invalid_argument("params: delta_iso_hz must be finite");
  const double twice = 2.0 * spin;
  if (!(spin >= 1.5) || std::abs(twice - std::round(twice)) > 1e-12 ||
      static_cast<long>(std::round(twice)) % 2 != 1)
    throw std::invalid_argument("params: spin must be a half-integer >= 3/2");
  if (!(spin_rate_hz > 0.0)) throw std::invalid_argument("params: spin_rate_hz must be positive");
  if (!(gaussian_broaden > 0.0) || !std::isfinite(gaussian_broaden))
    throw std::invalid_argument("params: gaussian_broaden must be positive");
}

double mas_central_transition_hz(double cq_hz, double eta, double spin, double larmor_hz,
                                 double cos_theta, double cos_2phi) {
  const double nu_q = 3.0 * cq_hz / (2.0 * spin * (2.0 * spin - 1.0));
  const double scale = nu_q * nu_q / (6.0 * larmor_hz) * (spin * (spin + 1.0) - 0.75);
  const double h = eta * cos_2phi;
  const double f0 = 21.0 / 16.0 - 7.0 / 8.0 * h + 7.0 / 48.0 * h * h;
  const double f2 = -9.0 / 8.0 + eta * eta / 12.0 + h - 7.0 / 24.0 * h * h;
  const double f4 = 5.0 / 16.0 - 1.0 / 8.0 * h + 7.0 / 48.0 * h * h;
  const double c2 = cos_theta * cos_theta;
  const double angular = f0 * c2 * c2 + f2 * c2 + f4;
  // Sphere average of `angular` is (1 + eta^2/3)/5; removing it leaves the
  // rank-4 part.
  const double isotropic = (1.0 + eta * eta / 3.0) / 5.0;
  return -scale * (angular - isotropic);
}

double StickSpectrum::total() const {
  double s = 0.0;
  for (double w : weight) s += w;
  return s;
}

StickSpectrum powder_sticks(const QuadrupolarParams& params, const SpectrumGrid& grid,
                            const PowderOptions& powder) {
  params.validate();
  grid.validate();
  if (powder.polar_steps < 1 || powder.azimuth_steps < 1)
    throw std::invalid_argument("powder grid must have at least one orientation");

  const double w = 1.0 / powder.orientations();
  const double half_pi = 0.5 * std::numbers::pi;
  std::vector<double> x(static_cast<std::size_t>(powder.orientations()));
  std::size_t o = 0;
  for (int a = 0; a < powder.azimuth_steps; ++a) {
    const double phi = (a + 0.5) * half_pi / powder.azimuth_steps;
    const double c2p = std::cos(2.0 * phi);
    for (int p = 0; p < powder.polar_steps; ++p) {
      const double u = (p + 0.5) / powder.polar_steps;
      const double nu = params.delta_iso_hz +
                        mas_central_transition_hz(params.cq_hz, params.eta, params.spin,
                                                  grid.larmor_hz, u, c2p);
      x[o++] = grid.bin_position(grid.center_hz + nu);
    }
  }

  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const long first = std::lround(*lo_it);
  const std::size_t span = static_cast<std::size_t>(std::lround(*hi_it) - first) + 1;
  std::vector<double> weight(span, 0.0), moment(span, 0.0);
  for (double xi : x) {
    const auto b = static_cast<std::size_t>(std::lround(xi) - first);
    weight[b] += w;
    moment[b] += w * xi;
  }

  StickSpectrum out;
  for (std::size_t b = 0; b < span; ++b) {
    if (weight[b] == 0.0) continue;
    out.position.push_back(moment[b] / weight[b]);
    out.weight.push_back(weight[b]);
  }
  return out;
}

namespace {

double kernel_norm(double sigma) {
  if (sigma >= 2.0) return sigma * std::sqrt(2.0 * std::numbers::pi);
  // Lattice sum; differs from the continuum value by up to a few percent
  // for sub-bin widths.
  const long reach = static_cast<long>(std::ceil(12.0 * sigma)) + 2;
  double z = 0.0;
  for (long l = -reach; l <= reach; ++l) z += std::exp(-0.5 * (l * l) / (sigma * sigma));
  return z;
}

}  // namespace

std::vector<double> broaden_sticks(const StickSpectrum& sticks, double sigma_bins, int n_points) {
  if (!(sigma_bins > 0.0) || !std::isfinite(sigma_bins))
    throw std::invalid_argument("broadening width must be positive");
  if (n_points < 1) throw std::invalid_argument("n_points must be positive");

  std::vector<double> out(n_points, 0.0);
  const double inv2s2 = 0.5 / (sigma_bins * sigma_bins);
  const double step_ratio = std::exp(-2.0 * inv2s2);
  const double reach = 10.0 * sigma_bins;
  const double norm = 1.0 / kernel_norm(sigma_bins);

  for (std::size_t k = 0; k < sticks.weight.size(); ++k) {
    const double c = sticks.position[k];
    const double m = sticks.weight[k] * norm;
    if (m == 0.0) continue;
    const long lo = std::max<long>(0, static_cast<long>(std::ceil(c - reach)));
    const long hi = std::min<long>(n_points - 1, static_cast<long>(std::floor(c + reach)));
    if (lo > hi) continue;
    // exp(-(d+1)^2 a) = exp(-d^2 a) * exp(-(2d+1) a): two multiplies per bin.
    const double d0 = static_cast<double>(lo) - c;
    double g = std::exp(-d0 * d0 * inv2s2);
    double r = std::exp(-(2.0 * d0 + 1.0) * inv2s2);
    for (long j = lo; j <= hi; ++j) {
      out[j] += m * g;
      g *= r;
      r *= step_ratio;
    }
  }
  return out;
}

std::vector<double> gaussian_broaden(std::span<const double> intensity, double width) {
  if (!(width > 0.0) || !std::isfinite(width))
    throw std::invalid_argument("gaussian_broaden: width must be positive");
  const int n = static_cast<int>(intensity.size());
  if (n < 2) throw std::invalid_argument("gaussian_broaden: need at least two points");
  StickSpectrum sticks;
  for (int j = 0; j < n; ++j) {
    if (intensity[j] != 0.0) {
      sticks.position.push_back(j);
      sticks.weight.push_back(intensity[j]);
    }
  }
  return broaden_sticks(sticks, width * (n - 1) / n, n);
}

PureComponent simulate_pure(const QuadrupolarParams& params, const SpectrumGrid& grid,
                            const PowderOptions& powder) {
  const StickSpectrum sticks = powder_sticks(params, grid, powder);
  const double sigma_bins = smoothing_sigma_hz(params.gaussian_broaden, grid) / grid.bin_width_hz();
  PureComponent pc;
  pc.params = params;
  pc.grid = grid;
  pc.intensity = broaden_sticks(sticks, sigma_bins, grid.n_points);
  return pc;
}

std::size_t LibraryGridSpec::size() const {
  return static_cast<std::size_t>(std::max(cq_steps, 0)) * std::max(eta_steps, 0) *
         std::max(diso_steps, 0) * smoothing.size();
}

void LibraryGridSpec::validate() const {
  if (cq_steps < 1) throw std::invalid_argument("grid spec: cq_steps must be >= 1");
  if (eta_steps < 1) throw std::invalid_argument("grid spec: eta_steps must be >= 1");
  if (diso_steps < 1) throw std::invalid_argument("grid spec: diso_steps must be >= 1");
  if (smoothing.empty()) throw std::invalid_argument("grid spec: smoothing must be non-empty");
  if (!(cq_max_hz >= 0.0)) throw std::invalid_argument("grid spec: cq_max_hz must be >= 0");
  if (!(diso_span_hz >= 0.0)) throw std::invalid_argument("grid spec: diso_span_hz must be >= 0");
  for (double s : smoothing)
    if (!(s > 0.0)) throw std::invalid_argument("grid spec: smoothing values must be positive");
}

namespace {
// Inclusive, equally spaced; a single step sits at the lower end.
double linspace_at(double lo, double hi, int steps, int i) {
  return steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1);
}
}  // namespace

QuadrupolarParams LibraryGridSpec::point(int cq, int eta, int diso, int smooth) const {
  QuadrupolarParams p;
  p.cq_hz = linspace_at(0.0, cq_max_hz, cq_steps, cq);
  p.eta = linspace_at(0.0, 1.0, eta_steps, eta);
  p.delta_iso_hz = diso_steps == 1 ? 0.0
                                   : linspace_at(-0.5 * diso_span_hz, 0.5 * diso_span_hz, diso_steps, diso);
  p.gaussian_broaden = smoothing.at(smooth);
  p.spin = spin;
  p.spin_rate_hz = spin_rate_hz;
  return p;
}

std::string LibraryGridSpec::point_id(int cq, int eta, int diso, int smooth) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "cq%02d-eta%02d-diso%02d-sm%02d", cq, eta, diso, smooth);
  return buf;
}

PureComponent library_component(const LibraryGridSpec& spec, const SpectrumGrid& grid, std::size_t index,
                                const PowderOptions& powder) {
  if (index >= spec.size()) throw std::out_of_range("library index out of range");
  const std::size_t ns = spec.smoothing.size();
  const int si = static_cast<int>(index % ns);
  const std::size_t shape = index / ns;
  const int di = static_cast<int>(shape % spec.diso_steps);
  const int ei = static_cast<int>((shape / spec.diso_steps) % spec.eta_steps);
  const int ci = static_cast<int>(shape / (static_cast<std::size_t>(spec.diso_steps) * spec.eta_steps));
  PureComponent pc = simulate_pure(spec.point(ci, ei, di, si), grid, powder);
  pc.id = LibraryGridSpec::point_id(ci, ei, di, si);
  return pc;
}

std::vector<PureComponent> generate_library(const LibraryGridSpec& spec, const SpectrumGrid& grid,
                                            unsigned workers, const PowderOptions& powder) {
  spec.validate();
  grid.validate();
  const int ns = static_cast<int>(spec.smoothing.size());
  const std::size_t n_shapes = static_cast<std::size_t>(spec.cq_steps) * spec.eta_steps * spec.diso_steps;
  std::vector<PureComponent> out(spec.size());

  // The powder pattern is shared by all smoothing values of a shape.
  auto build_shape = [&](std::size_t shape) {
    const int di = static_cast<int>(shape % spec.diso_steps);
    const int ei = static_cast<int>((shape / spec.diso_steps) % spec.eta_steps);
    const int ci = static_cast<int>(shape / (static_cast<std::size_t>(spec.diso_steps) * spec.eta_steps));
    const StickSpectrum sticks = powder_sticks(spec.point(ci, ei, di, 0), grid, powder);
    for (int si = 0; si < ns; ++si) {
      PureComponent& pc = out[shape * ns + si];
      pc.id = LibraryGridSpec::point_id(ci, ei, di, si);
      pc.params = spec.point(ci, ei, di, si);
      pc.grid = grid;
      const double sigma = smoothing_sigma_hz(pc.params.gaussian_broaden, grid) / grid.bin_width_hz();
      pc.intensity = broaden_sticks(sticks, sigma, grid.n_points);
    }
  };

  workers = std::max(1u, workers);
  if (workers == 1) {
    for (std::size_t s = 0; s < n_shapes; ++s) build_shape(s);
    return out;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t s = w; s < n_shapes; s += workers) build_shape(s);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace bssnmr
