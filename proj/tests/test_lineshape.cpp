#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <random>
#include <set>

#include "bssnmr/lineshape.hpp"
#include "oracles.hpp"

using namespace bssnmr;

namespace {

double spectrum_mean_hz(const PureComponent& pc) {
  double s0 = 0, s1 = 0;
  for (int j = 0; j < pc.grid.n_points; ++j) {
    s0 += pc.intensity[j];
    s1 += pc.intensity[j] * pc.grid.frequency_hz(j);
  }
  return s1 / s0;
}

// Central-transition shift for an axially symmetric EFG from the static
// first-principles expression, averaged numerically over the rotor phase at
// the magic angle, with the orientation-independent part removed.
// `cos_beta` orients the EFG unique axis relative to the rotor axis.
double rotor_averaged_shift_hz(double cq, double spin, double larmor, double cos_beta) {
  const double nu_q = 3.0 * cq / (2.0 * spin * (2.0 * spin - 1.0));
  const double pre = -nu_q * nu_q / (16.0 * larmor) * (spin * (spin + 1.0) - 0.75);
  auto static_shift = [&](double c) { return pre * (1 - c * c) * (9 * c * c - 1); };
  const double cm = 1.0 / std::sqrt(3.0), sm = std::sqrt(2.0 / 3.0);
  const double sb = std::sqrt(std::max(0.0, 1 - cos_beta * cos_beta));
  constexpr int phases = 16;  // exact for the degree-4 trigonometric polynomial
  double avg = 0.0;
  for (int p = 0; p < phases; ++p) {
    const double c = cos_beta * cm + sb * sm * std::cos(2 * std::numbers::pi * p / phases);
    avg += static_shift(c);
  }
  avg /= phases;
  // Sphere average of (1 - x)(9x - 1) with x = cos^2 is 8/15.
  return avg - pre * 8.0 / 15.0;
}

std::vector<double> impulse(int n, int at, double area = 1.0) {
  std::vector<double> v(n, 0.0);
  v[at] = area;
  return v;
}

}  // namespace

TEST(Lineshape, ZeroCouplingIsSymmetricGaussian) {
  SpectrumGrid g;
  for (double eta : {0.0, 0.5, 1.0}) {
    for (double smoothing : {8.0, 64.0}) {
      QuadrupolarParams p;
      p.eta = eta;
      p.gaussian_broaden = smoothing;
      p.delta_iso_hz = 0.5 * g.bin_width_hz();  // sits exactly on bin 512
      const PureComponent pc = simulate_pure(p, g);
      const auto& v = pc.intensity;
      const double peak = *std::max_element(v.begin(), v.end());
      EXPECT_EQ(std::max_element(v.begin(), v.end()) - v.begin(), 512);
      for (int d = 1; d < 512; ++d) ASSERT_NEAR(v[512 + d], v[512 - d], 1e-9 * peak) << d;

      // Width follows the smoothing convention.
      const double sigma_bins = smoothing_sigma_hz(smoothing, g) / g.bin_width_hz();
      double s0 = 0, s2 = 0;
      for (int j = 0; j < g.n_points; ++j) s0 += v[j], s2 += v[j] * (j - 512.0) * (j - 512.0);
      EXPECT_NEAR(std::sqrt(s2 / s0), sigma_bins, 1e-3 * sigma_bins);
    }
  }
}

TEST(Lineshape, MeanFrequencyMatchesDensePowderAverage) {
  SpectrumGrid g;
  QuadrupolarParams p;
  p.cq_hz = 4e6;
  p.eta = 0.0;
  p.spin = 1.5;
  p.gaussian_broaden = 8.0;
  const PureComponent pc = simulate_pure(p, g);
  const double mean = spectrum_mean_hz(pc);

  // 2^20 random orientations; each contributes a unit-area Gaussian clipped to
  // the window [first bin - half bin, last bin + half bin].
  const double sigma = smoothing_sigma_hz(p.gaussian_broaden, g);
  const double lo = g.frequency_hz(0) - 0.5 * g.bin_width_hz();
  const double hi = g.frequency_hz(g.n_points - 1) + 0.5 * g.bin_width_hz();
  std::mt19937_64 gen(12345);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double inv = 1.0 / (sigma * std::sqrt(2.0));
  double mass = 0, moment = 0;
  constexpr int n = 1 << 20;
  for (int i = 0; i < n; ++i) {
    const double nu = p.delta_iso_hz + rotor_averaged_shift_hz(p.cq_hz, p.spin, g.larmor_hz, unif(gen));
    const double a = (lo - nu) * inv, b = (hi - nu) * inv;
    const double m = 0.5 * (std::erf(b) - std::erf(a));
    const double first = nu * m + sigma / std::sqrt(2 * std::numbers::pi) * (std::exp(-a * a) - std::exp(-b * b));
    mass += m;
    moment += first;
  }
  const double oracle_mean = moment / mass;
  EXPECT_NEAR(mean, oracle_mean, 0.005 * g.sweep_width_hz);
}

TEST(Lineshape, FrequencyAgreesWithStaticDerivationPointwise) {
  // Same physics, different algebra: the implementation's rank-4 expression
  // against the rotor-averaged static formula for eta = 0.
  for (double c : {0.0, 0.1, 0.37, 0.5, 0.77, 0.9, 1.0}) {
    const double ours = mas_central_transition_hz(2.5e6, 0.0, 1.5, 100e6, c, 0.3);
    EXPECT_NEAR(ours, rotor_averaged_shift_hz(2.5e6, 1.5, 100e6, c), 1e-9 * std::abs(ours) + 1e-9);
  }
}

TEST(Lineshape, HighCouplingLineIsSkewed) {
  SpectrumGrid g;
  QuadrupolarParams p;
  p.cq_hz = 4e6;
  p.eta = 0.0;

  // Oracle skewness of the frequency distribution from random orientations.
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  constexpr int n = 200000;
  std::vector<double> nu(n), ones(n, 1.0);
  for (int i = 0; i < n; ++i) nu[i] = rotor_averaged_shift_hz(p.cq_hz, p.spin, g.larmor_hz, unif(gen));
  const double oracle_skew = oracle::weighted_skewness(ones, nu);
  const double se = std::sqrt(6.0 / n);
  ASSERT_GT(std::abs(oracle_skew), 3 * se);

  const StickSpectrum sticks = powder_sticks(p, g);
  const double ours = oracle::weighted_skewness(sticks.weight, sticks.position);
  EXPECT_GT(std::abs(ours), 3 * se);
  EXPECT_EQ(std::signbit(ours), std::signbit(oracle_skew));
  EXPECT_NEAR(ours, oracle_skew, 0.05 * std::abs(oracle_skew));

  // The sampled spectrum itself is visibly asymmetric too.
  const PureComponent pc = simulate_pure(p, g);
  std::vector<double> bins(g.n_points);
  for (int j = 0; j < g.n_points; ++j) bins[j] = j;
  EXPECT_GT(std::abs(oracle::weighted_skewness(pc.intensity, bins)), 3 * se);
}

TEST(Lineshape, SticksAreNormalizedBeforeBroadening) {
  SpectrumGrid g;
  LibraryGridSpec spec;
  for (int ci : {0, 13, 39})
    for (int ei : {0, 9})
      for (int di : {0, 9}) {
        const StickSpectrum s = powder_sticks(spec.point(ci, ei, di, 0), g);
        EXPECT_NEAR(s.total(), 1.0, 1e-9);
      }
}

TEST(Lineshape, PowderGridConvergesOnDoubling) {
  SpectrumGrid g;
  QuadrupolarParams p;
  p.cq_hz = 3e6;
  p.eta = 0.4;
  p.gaussian_broaden = 16.0;
  const auto a = simulate_pure(p, g, PowderOptions{256, 128}).intensity;
  const auto b = simulate_pure(p, g, PowderOptions{512, 256}).intensity;
  double diff = 0, norm = 0;
  for (int j = 0; j < g.n_points; ++j) diff += std::abs(a[j] - b[j]), norm += std::abs(b[j]);
  EXPECT_LT(diff / norm, 1e-3);
}

TEST(Lineshape, NonnegativeAcrossParameterCorners) {
  SpectrumGrid g;
  LibraryGridSpec spec;
  for (int ci : {0, 20, 39})
    for (int ei : {0, 5, 9})
      for (int di : {0, 9})
        for (int si : {0, 7}) {
          const PureComponent pc = simulate_pure(spec.point(ci, ei, di, si), g);
          double sum = 0;
          for (double v : pc.intensity) {
            ASSERT_GE(v, 0.0);
            sum += v;
          }
          EXPECT_GT(sum, 0.0);
        }
}

TEST(Lineshape, DeterministicGridPoint) {
  SpectrumGrid g;
  LibraryGridSpec spec;
  const QuadrupolarParams p = spec.point(20, 5, 5, 3);
  const auto a = simulate_pure(p, g).intensity;
  const auto b = simulate_pure(p, g).intensity;
  ASSERT_EQ(a.size(), b.size());
  EXPECT_EQ(0, std::memcmp(a.data(), b.data(), a.size() * sizeof(double)));
}

TEST(Lineshape, LineBeyondWindowIsNotAnError) {
  SpectrumGrid g;
  QuadrupolarParams p;
  p.delta_iso_hz = 3750;
  p.gaussian_broaden = 1024;
  EXPECT_NO_THROW(simulate_pure(p, g));
}

TEST(Lineshape, InvalidInputsThrow) {
  SpectrumGrid g;
  QuadrupolarParams p;
  p.eta = 1.5;
  EXPECT_THROW(simulate_pure(p, g), std::invalid_argument);
  p = {};
  p.spin = 2.0;
  EXPECT_THROW(simulate_pure(p, g), std::invalid_argument);
  p = {};
  p.cq_hz = -1;
  EXPECT_THROW(simulate_pure(p, g), std::invalid_argument);
  p = {};
  p.gaussian_broaden = 0;
  EXPECT_THROW(simulate_pure(p, g), std::invalid_argument);
  SpectrumGrid bad;
  bad.n_points = 1;
  EXPECT_THROW(simulate_pure(QuadrupolarParams{}, bad), std::invalid_argument);
}

// --- library ------------------------------------------------------------

TEST(Library, DefaultGridHas32000DistinctIds) {
  LibraryGridSpec spec;
  EXPECT_EQ(spec.size(), 32000u);
  std::set<std::string> ids;
  for (int c = 0; c < spec.cq_steps; ++c)
    for (int e = 0; e < spec.eta_steps; ++e)
      for (int d = 0; d < spec.diso_steps; ++d)
        for (int s = 0; s < static_cast<int>(spec.smoothing.size()); ++s) ids.insert(LibraryGridSpec::point_id(c, e, d, s));
  EXPECT_EQ(ids.size(), 32000u);
}

TEST(Library, GridEndpointsAreInclusive) {
  LibraryGridSpec spec;
  EXPECT_EQ(spec.point(0, 0, 0, 0).cq_hz, 0.0);
  EXPECT_EQ(spec.point(39, 0, 0, 0).cq_hz, 4e6);
  EXPECT_EQ(spec.point(0, 9, 0, 0).eta, 1.0);
  EXPECT_EQ(spec.point(0, 0, 0, 0).delta_iso_hz, -3750.0);
  EXPECT_EQ(spec.point(0, 0, 9, 0).delta_iso_hz, 3750.0);
  EXPECT_EQ(spec.point(0, 0, 0, 7).gaussian_broaden, 1024.0);
}

TEST(Library, SingletonEqualsSimulatePure) {
  LibraryGridSpec spec;
  spec.cq_steps = spec.eta_steps = spec.diso_steps = 1;
  spec.smoothing = {32};
  SpectrumGrid g;
  const PowderOptions powder{64, 32};
  const auto lib = generate_library(spec, g, 1, powder);
  ASSERT_EQ(lib.size(), 1u);
  EXPECT_EQ(lib[0].intensity, simulate_pure(spec.point(0, 0, 0, 0), g, powder).intensity);
}

TEST(Library, SmallGridMatchesPointwiseSimulationBitExactly) {
  LibraryGridSpec spec;
  spec.cq_steps = spec.eta_steps = spec.diso_steps = 2;
  spec.smoothing = {8, 256};
  SpectrumGrid g;
  const PowderOptions powder{64, 32};
  for (unsigned workers : {1u, 3u}) {
    const auto lib = generate_library(spec, g, workers, powder);
    ASSERT_EQ(lib.size(), 16u);
    std::set<std::string> ids;
    for (std::size_t i = 0; i < lib.size(); ++i) {
      ids.insert(lib[i].id);
      const PureComponent ref = library_component(spec, g, i, powder);
      EXPECT_EQ(lib[i].id, ref.id);
      EXPECT_EQ(lib[i].params, ref.params);
      ASSERT_EQ(0, std::memcmp(lib[i].intensity.data(), ref.intensity.data(), ref.intensity.size() * sizeof(double)));
    }
    EXPECT_EQ(ids.size(), 16u);
  }
  // Ordering: cq-major then eta, diso, smoothing.
  const auto lib = generate_library(spec, g, 1, powder);
  EXPECT_EQ(lib[1].id, LibraryGridSpec::point_id(0, 0, 0, 1));
  EXPECT_EQ(lib[2].id, LibraryGridSpec::point_id(0, 0, 1, 0));
  EXPECT_EQ(lib[8].id, LibraryGridSpec::point_id(1, 0, 0, 0));
}

TEST(Library, EmptyDimensionThrows) {
  LibraryGridSpec spec;
  spec.eta_steps = 0;
  EXPECT_THROW(generate_library(spec, SpectrumGrid{}), std::invalid_argument);
  spec = {};
  spec.smoothing.clear();
  EXPECT_THROW(generate_library(spec, SpectrumGrid{}), std::invalid_argument);
}

// --- gaussian_broaden ---------------------------------------------------

TEST(GaussianBroaden, ImpulseResponseKeepsAreaAndCentre) {
  const auto out = gaussian_broaden(impulse(1024, 512, 2.5), 4.0);
  double s0 = 0, s1 = 0;
  for (int j = 0; j < 1024; ++j) s0 += out[j], s1 += j * out[j];
  EXPECT_NEAR(s0, 2.5, 1e-9 * 2.5);
  EXPECT_NEAR(s1 / s0, 512.0, 1e-9);
  EXPECT_EQ(std::max_element(out.begin(), out.end()) - out.begin(), 512);
}

TEST(GaussianBroaden, VeryWideKernelIsFlat) {
  const auto out = gaussian_broaden(impulse(1024, 512), 1e6);
  const auto [lo, hi] = std::minmax_element(out.begin() + 256, out.begin() + 768);
  EXPECT_LT(*hi / *lo, 1.01);
}

TEST(GaussianBroaden, SequentialWidthsAddInQuadrature) {
  const double a = 6.0, b = 9.0;
  const auto once = gaussian_broaden(impulse(1024, 512), std::hypot(a, b));
  const auto twice = gaussian_broaden(gaussian_broaden(impulse(1024, 512), a), b);
  const double peak = *std::max_element(once.begin(), once.end());
  for (int j = 256; j < 768; ++j) ASSERT_NEAR(twice[j], once[j], 1e-8 * peak) << j;
}

TEST(GaussianBroaden, RejectsNonPositiveWidth) {
  const auto v = impulse(16, 8);
  EXPECT_THROW(gaussian_broaden(v, 0.0), std::invalid_argument);
  EXPECT_THROW(gaussian_broaden(v, -1.0), std::invalid_argument);
}
