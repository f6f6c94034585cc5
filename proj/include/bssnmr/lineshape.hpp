#pragma once

#include <span>
#include <string>
#include <vector>

namespace bssnmr {

/// Frequency axis shared by every spectrum of a library or dataset.
struct SpectrumGrid {
  int n_points = 1024;
  double sweep_width_hz = 10000.0;
  double larmor_hz = 100e6;
  double center_hz = 0.0;

  double bin_width_hz() const { return sweep_width_hz / (n_points - 1); }
  double frequency_hz(int bin) const {
    return center_hz - 0.5 * sweep_width_hz + bin * bin_width_hz();
  }
  /// Fractional bin position of a frequency (may fall outside [0, n_points)).
  double bin_position(double hz) const {
    return (hz - (center_hz - 0.5 * sweep_width_hz)) / bin_width_hz();
  }
  void validate() const;
  bool operator==(const SpectrumGrid&) const = default;
};

/// Second-order quadrupolar interaction and acquisition settings of one site.
struct QuadrupolarParams {
  double cq_hz = 0.0;
  double eta = 0.0;
  double delta_iso_hz = 0.0;  // offset from the window center
  double spin = 1.5;
  double spin_rate_hz = 10000.0;  // metadata only; sidebands are not simulated
  double gaussian_broaden = 8.0;  // smoothing value, see smoothing_sigma_hz
  void validate() const;
  bool operator==(const QuadrupolarParams&) const = default;
};

struct PureComponent {
  std::string id;
  QuadrupolarParams params;
  SpectrumGrid grid;
  std::vector<double> intensity;
};

/// Deterministic equal-area powder grid: midpoints in cos(theta) on [0, 1]
/// and in phi on [0, pi/2]. The central-transition frequency under MAS is
/// even in cos(theta) and in cos(2 phi), so one octant covers the sphere.
struct PowderOptions {
  int polar_steps = 256;
  int azimuth_steps = 128;
  int orientations() const { return polar_steps * azimuth_steps; }
};

/// Smoothing kernel standard deviation: value * (sweep width / n_points).
inline double smoothing_sigma_hz(double smoothing, const SpectrumGrid& g) {
  return smoothing * g.sweep_width_hz / g.n_points;
}

/// Central-transition frequency offset under infinitely fast MAS, fourth-rank
/// angular term only (the isotropic second-order shift is not applied).
/// `cos_theta` and `cos_2phi` orient the field in the EFG principal frame.
double mas_central_transition_hz(double cq_hz, double eta, double spin, double larmor_hz,
                                 double cos_theta, double cos_2phi);

/// Pre-broadening powder pattern binned on the grid's bin lattice, extended
/// beyond the window as needed. Each occupied bin keeps its total weight and
/// the weight-averaged fractional position of its orientations. Weights sum to 1.
struct StickSpectrum {
  std::vector<double> position;  // fractional bin index
  std::vector<double> weight;
  double total() const;
};

StickSpectrum powder_sticks(const QuadrupolarParams& params, const SpectrumGrid& grid,
                            const PowderOptions& powder = {});

/// Convolve sticks with a unit-area Gaussian of `sigma_bins` and sample the
/// result at bins [0, n_points).
std::vector<double> broaden_sticks(const StickSpectrum& sticks, double sigma_bins, int n_points);

/// Gaussian smoothing of a sampled spectrum. `width` is in smoothing units;
/// the kernel sigma in bins is width * (n - 1) / n for n points.
std::vector<double> gaussian_broaden(std::span<const double> intensity, double width);

PureComponent simulate_pure(const QuadrupolarParams& params, const SpectrumGrid& grid,
                            const PowderOptions& powder = {});

/// Cartesian parameter grid for a pure-component library.
struct LibraryGridSpec {
  int cq_steps = 40;
  double cq_max_hz = 4e6;
  int eta_steps = 10;
  int diso_steps = 10;
  double diso_span_hz = 7500.0;
  std::vector<double> smoothing{8, 16, 32, 64, 128, 256, 512, 1024};
  double spin = 1.5;
  double spin_rate_hz = 10000.0;

  std::size_t size() const;
  void validate() const;
  /// Parameters of grid point (cq, eta, diso, smoothing) indices.
  QuadrupolarParams point(int cq, int eta, int diso, int smooth) const;
  static std::string point_id(int cq, int eta, int diso, int smooth);
  bool operator==(const LibraryGridSpec&) const = default;
};

/// Grid point `index` in library order, identical to the library entry.
PureComponent library_component(const LibraryGridSpec& spec, const SpectrumGrid& grid, std::size_t index,
                                const PowderOptions& powder = {});

/// One component per grid point, ordered cq-major then eta, diso, smoothing.
/// Output does not depend on `workers`.
std::vector<PureComponent> generate_library(const LibraryGridSpec& spec, const SpectrumGrid& grid,
                                            unsigned workers = 1, const PowderOptions& powder = {});

}  // namespace bssnmr
