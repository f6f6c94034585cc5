#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "internal.hpp"

namespace bssnmr {

// Conventional SIMPLISMA (Windig): pure variables by purity weighted with the
// determinant of the correlation-around-origin matrix of the variables chosen
// so far, then spectra by least squares against their intensity profiles.
ComponentSet simplisma(const Matrix& x, int k, double offset_percent) {
  detail::require_k(x, k, "simplisma");
  if (!(offset_percent >= 0.0)) throw std::invalid_argument("simplisma: offset must be >= 0");
  const Eigen::Index rows = x.rows();
  const Eigen::Index vars = x.cols();

  const Vector mu = x.colwise().mean().transpose();
  const Vector sigma = ((x.rowwise() - mu.transpose()).colwise().squaredNorm() / static_cast<double>(rows))
                           .cwiseSqrt()
                           .transpose();
  // Signed data: magnitudes of the means set the purity scale.
  const Vector mu_abs = mu.cwiseAbs();
  const double alpha = offset_percent / 100.0 * mu_abs.maxCoeff();

  Vector base_purity(vars);
  Matrix y(rows, vars);  // length-scaled data
  for (Eigen::Index j = 0; j < vars; ++j) {
    const double denom = mu_abs(j) + alpha;
    base_purity(j) = (sigma(j) > 0.0 && denom > 0.0) ? sigma(j) / denom : 0.0;
    const double len = std::sqrt(mu(j) * mu(j) + (sigma(j) + alpha) * (sigma(j) + alpha));
    y.col(j) = len > 0.0 ? Vector(x.col(j) / len) : Vector::Zero(rows);
  }
  const double inv_rows = 1.0 / static_cast<double>(rows);
  const Vector r_diag = y.colwise().squaredNorm().transpose() * inv_rows;

  std::vector<int> selected;
  std::vector<double> weights_at_pick;
  constexpr double kDegenerate = 1e-9;
  for (int step = 0; step < k; ++step) {
    Vector weight(vars);
    Vector fresh = Vector::Ones(vars);  // share of r_diag outside the chosen span
    if (selected.empty()) {
      weight = r_diag;
    } else {
      const auto s = static_cast<Eigen::Index>(selected.size());
      Matrix ys(rows, s);
      for (Eigen::Index a = 0; a < s; ++a) ys.col(a) = y.col(selected[a]);
      const Matrix r_ss = ys.transpose() * ys * inv_rows;
      const Eigen::FullPivLU<Matrix> lu(r_ss);
      const double det_ss = lu.determinant();
      const Matrix r_sj = ys.transpose() * y * inv_rows;  // s x vars
      const Matrix solved = lu.solve(r_sj);
      for (Eigen::Index j = 0; j < vars; ++j) {
        const double schur = r_diag(j) - r_sj.col(j).dot(solved.col(j));
        weight(j) = det_ss * schur;
        fresh(j) = r_diag(j) > 0.0 ? schur / r_diag(j) : 0.0;
      }
    }

    std::vector<Eigen::Index> order(vars);
    std::iota(order.begin(), order.end(), 0);
    const Vector purity = weight.cwiseProduct(base_purity);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return purity(a) > purity(b); });

    int pick = -1;
    for (Eigen::Index j : order) {
      if (!(purity(j) > 0.0)) break;
      if (std::find(selected.begin(), selected.end(), j) != selected.end()) continue;
      if (fresh(j) <= kDegenerate) continue;  // inside the span of chosen variables
      pick = static_cast<int>(j);
      break;
    }
    if (pick < 0) throw TechniqueFailure("simplisma: no non-degenerate pure variable left");
    selected.push_back(pick);
    weights_at_pick.push_back(weight(pick));
  }

  ComponentSet set;
  set.k_requested = k;
  set.coefficients.resize(rows, k);
  for (int i = 0; i < k; ++i) set.coefficients.col(i) = x.col(selected[i]);
  set.components = set.coefficients.completeOrthogonalDecomposition().solve(x);
  set.metadata["pure_variables"] = selected;
  set.metadata["offset_percent"] = offset_percent;
  set.metadata["determinant_weights"] = weights_at_pick;
  return set;
}

}  // namespace bssnmr
