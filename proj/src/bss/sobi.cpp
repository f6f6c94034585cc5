#include <cmath>
#include <stdexcept>

#include "internal.hpp"

namespace bssnmr {

// Second-order blind identification along the spectrum index: the rows of x
// form a short time series of k-dimensional source activities.
ComponentSet sobi(const Matrix& x, int k, const std::vector<int>& lags) {
  detail::require_k(x, k, "sobi");
  const Eigen::Index t = x.rows();
  if (lags.empty()) throw std::invalid_argument("sobi: lag set is empty");
  for (int lag : lags)
    if (lag < 0 || lag >= t) throw std::invalid_argument("sobi: lags must lie in [0, rows)");

  const Vector mean = x.colwise().mean().transpose();
  const SvdResult d = svd(x.rowwise() - mean.transpose());
  const double sqrt_t = std::sqrt(static_cast<double>(t));
  const Matrix z = sqrt_t * d.u.leftCols(k);  // t x k, z^T z / t = I

  std::vector<Matrix> lagged;
  for (int lag : lags) {
    const Matrix a = z.topRows(t - lag);
    const Matrix b = z.bottomRows(t - lag);
    Matrix r = a.transpose() * b / static_cast<double>(t - lag);
    lagged.push_back(0.5 * (r + r.transpose()));
  }
  const JointDiagResult jd = joint_diagonalize(lagged, 1e-12, 200);

  ComponentSet set;
  set.k_requested = k;
  set.coefficients = z * jd.v;
  set.components = jd.v.transpose() * d.s.head(k).asDiagonal() * d.vt.topRows(k) / sqrt_t;
  set.column_offset = mean;
  set.converged = jd.converged;
  set.metadata["lags"] = lags;
  set.metadata["sweeps"] = jd.sweeps;
  detail::sort_by_energy(set);
  return set;
}

}  // namespace bssnmr
