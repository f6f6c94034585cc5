#include <cmath>

#include "internal.hpp"

namespace bssnmr {

namespace {

// (W W^T)^{-1/2} W
Matrix symmetric_decorrelation(const Matrix& w) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(w * w.transpose());
  const Vector inv_sqrt = es.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose() * w;
}

}  // namespace

// Parallel fixed-point FastICA with the log-cosh contrast (g = tanh).
ComponentSet fastica(const Matrix& x, int k, std::uint64_t seed, const FastIcaOptions& opt) {
  detail::require_k(x, k, "fastica");
  const detail::Whitened wh = detail::whiten_rows(x, k);
  const double n = static_cast<double>(wh.z.cols());

  Rng rng(seed);
  Matrix w(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) w(i, j) = rng.gaussian();
  w = symmetric_decorrelation(w);

  bool converged = false;
  int it = 0;
  double lim = 0.0;
  for (; it < opt.max_iterations; ++it) {
    const Matrix wx = w * wh.z;
    const Matrix g = wx.array().tanh().matrix();
    const Vector g_prime_mean = (1.0 - g.array().square()).matrix().rowwise().mean();
    Matrix w1 = (g * wh.z.transpose()) / n - g_prime_mean.asDiagonal() * w;
    w1 = symmetric_decorrelation(w1);
    lim = ((w1 * w.transpose()).diagonal().cwiseAbs().array() - 1.0).abs().maxCoeff();
    w = std::move(w1);
    if (lim < opt.tolerance) {
      converged = true;
      ++it;
      break;
    }
  }

  ComponentSet set;
  set.k_requested = k;
  set.components = w * wh.z;
  set.coefficients = wh.dewhiten * w.transpose();
  detail::restore_source_means(set, wh.row_mean);
  set.converged = converged;
  set.metadata["iterations"] = it;
  set.metadata["final_change"] = lim;
  if (wh.rank_deficient) set.metadata["rank_deficient"] = true;
  detail::sort_by_energy(set);
  return set;
}

}  // namespace bssnmr
