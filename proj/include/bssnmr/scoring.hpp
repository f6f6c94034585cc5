#pragma once

#include <span>
#include <vector>

#include "bssnmr/bss.hpp"
#include "bssnmr/lineshape.hpp"

namespace bssnmr {

/// Affine fit predicted ~ offset + multiplier * pure and its residual sum of squares.
struct PairFit {
  double offset = 0.0;      // B
  double multiplier = 0.0;  // M, may be negative
  double lack_of_fit = 0.0;
};

/// Closed-form least-squares fit of `predicted` as an affine image of `pure`.
/// Throws DegenerateFitError when `pure` is constant.
PairFit fit_pair(std::span<const double> predicted, std::span<const double> pure);

/// lack_of_fit divided by the centered energy of `predicted` (1 - R^2).
double normalized_lack_of_fit(std::span<const double> predicted, std::span<const double> pure);

struct MatchedPair {
  int predicted = 0;
  int pure = 0;
  PairFit fit;
};

struct MatchReport {
  std::vector<MatchedPair> pairs;  // sorted by predicted index
  double ensemble_score = 0.0;     // sum of 1 / lack_of_fit over pairs
  std::vector<int> discarded_predicted;
  std::vector<int> unmatched_pure;
  int n_points = 0;
  double dataset_error = 0.0;
};

/// Guards exact-zero fits in the inverse-error score.
inline constexpr double kZeroFitFloor = 1e-300;

/// Scale a predicted spectrum to unit centered RMS. Scoring is done on
/// standardized predictions so that errors do not depend on the arbitrary
/// scale a technique assigns to its components. Constant input is returned
/// unchanged.
std::vector<double> standardize(std::span<const double> predicted);

/// Pairwise lack-of-fit matrix (predicted rows x pure rows) on standardized
/// predictions. A constant prediction explains nothing and gets lack_of_fit
/// equal to its length.
Matrix lack_of_fit_matrix(const Matrix& predicted, const Matrix& pures);

/// One-to-one matching of predicted to pure components maximizing the sum of
/// inverse lack-of-fit. Surplus predictions are discarded; surplus pures are
/// listed as unmatched and contribute nothing.
MatchReport best_assignment(const Matrix& predicted, const Matrix& pures);
MatchReport best_assignment(const ComponentSet& predicted, std::span<const PureComponent> pures);

/// Mean over matched pairs of lack_of_fit / n_points.
double dataset_error(const MatchReport& report, int n_points);

/// mean(plus) / mean(exact).
double overprediction_ratio(std::span<const double> errors_at_exact, std::span<const double> errors_at_plus);

}  // namespace bssnmr
