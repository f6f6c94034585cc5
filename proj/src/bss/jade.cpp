#include <cmath>
#include <numbers>

#include "internal.hpp"

namespace bssnmr {

// Cardoso's JADE: fourth-order cumulant matrices of the whitened signals,
// jointly diagonalized by Jacobi rotations.
ComponentSet jade(const Matrix& x, int k) {
  detail::require_k(x, k, "jade");
  const detail::Whitened wh = detail::whiten_rows(x, k);
  const Matrix& z = wh.z;
  const double n = static_cast<double>(z.cols());

  std::vector<Matrix> cumulants;
  cumulants.reserve(static_cast<std::size_t>(k * (k + 1) / 2));
  const Matrix identity = Matrix::Identity(k, k);
  for (int i = 0; i < k; ++i) {
    const Eigen::RowVectorXd zi = z.row(i);
    {
      const Matrix weighted = z.array().rowwise() * zi.array().square();
      Matrix q = weighted * z.transpose() / n - identity;
      q(i, i) -= 2.0;
      cumulants.push_back(std::move(q));
    }
    for (int j = 0; j < i; ++j) {
      const Matrix weighted = z.array().rowwise() * (zi.array() * z.row(j).array());
      Matrix q = weighted * z.transpose() / n;
      q(i, j) -= 1.0;
      q(j, i) -= 1.0;
      cumulants.push_back(std::numbers::sqrt2 * q);
    }
  }
  // Remove rounding asymmetry so every matrix is exactly symmetric.
  for (Matrix& q : cumulants) q = 0.5 * (q + q.transpose()).eval();

  const JointDiagResult jd = joint_diagonalize(cumulants, 1e-10 / std::sqrt(n), 200);

  ComponentSet set;
  set.k_requested = k;
  set.components = jd.v.transpose() * z;
  set.coefficients = wh.dewhiten * jd.v;
  detail::restore_source_means(set, wh.row_mean);
  set.converged = jd.converged;
  set.metadata["sweeps"] = jd.sweeps;
  if (wh.rank_deficient) set.metadata["rank_deficient"] = true;
  detail::sort_by_energy(set);
  return set;
}

}  // namespace bssnmr
