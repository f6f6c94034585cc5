#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bssnmr/lineshape.hpp"
#include "bssnmr/numkernel.hpp"

namespace bssnmr {

enum class IntensityModel { inversion, nutation };
enum class Normalization { none, peak, area };

std::string to_string(IntensityModel m);
std::string to_string(Normalization n);
IntensityModel parse_model(const std::string& s);
Normalization parse_normalization(const std::string& s);

inline constexpr int kSpectraPerDataset = 20;
inline constexpr int kMinComponents = 2;
inline constexpr int kMaxComponents = 10;
// 1 - 2 exp(-x) >= 0.985 for x >= ln(400/3) ~= 4.89285.
inline constexpr double kFullRecoveryFactor = 4.8929;

/// Signed weight of one component across the spectra of a dataset.
struct IntensitySeries {
  std::string component_id;
  IntensityModel model = IntensityModel::inversion;
  double amplitude = 1.0;
  double t1 = 0.0;         // inversion only
  double frequency = 0.0;  // nutation only
  std::vector<double> values;

  bool operator==(const IntensitySeries&) const = default;
};

struct MixtureDataset {
  SpectrumGrid grid;
  Matrix spectra;  // kSpectraPerDataset x n_points
  IntensityModel model = IntensityModel::inversion;
  std::vector<IntensitySeries> components;
  std::vector<double> axis;  // recovery delays or pulse fractions, one per row
  double noise_factor = 0.0;
  std::uint64_t seed = 0;
  Normalization normalization = Normalization::none;
  // Total |signal| over total |noise| before normalization; absent when noiseless.
  std::optional<double> signal_to_noise;

  std::size_t rows() const { return static_cast<std::size_t>(spectra.rows()); }
};

/// Single-pass reservoir sample of k distinct library indices.
std::vector<std::size_t> sample_indices(std::size_t library_size, std::size_t k, std::uint64_t seed);

std::vector<PureComponent> sample_components(std::span<const PureComponent> library, std::size_t k,
                                             std::uint64_t seed);

/// A (1 - 2 exp(-tau / T1)) for each tau.
std::vector<double> inversion_profile(double amplitude, double t1, std::span<const double> taus);

/// A cos(2 pi f pulse) for each pulse in [0, 1].
std::vector<double> nutation_profile(double amplitude, double frequency, std::span<const double> pulses);

/// Stack `pures` (rows) into a matrix.
Matrix pure_matrix(std::span<const PureComponent> pures);

/// kSpectraPerDataset x k weight matrix of a dataset's series.
Matrix weight_matrix(const MixtureDataset& ds);

MixtureDataset assemble_dataset(std::span<const PureComponent> pures, IntensityModel model,
                                std::uint64_t seed, double noise_factor);

MixtureDataset normalize(const MixtureDataset& ds, Normalization mode);

}  // namespace bssnmr
