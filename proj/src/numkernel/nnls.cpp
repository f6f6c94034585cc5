#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "bssnmr/numkernel.hpp"

namespace bssnmr {

namespace {

// Unconstrained solve restricted to the passive set.
Vector solve_passive(const Matrix& gram, const Vector& atb, const std::vector<bool>& passive) {
  const Eigen::Index n = gram.rows();
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < n; ++i)
    if (passive[i]) idx.push_back(i);
  Vector z = Vector::Zero(n);
  if (idx.empty()) return z;
  const auto p = static_cast<Eigen::Index>(idx.size());
  Matrix g(p, p);
  Vector r(p);
  for (Eigen::Index a = 0; a < p; ++a) {
    r(a) = atb(idx[a]);
    for (Eigen::Index b = 0; b < p; ++b) g(a, b) = gram(idx[a], idx[b]);
  }
  Vector sol = g.ldlt().solve(r);
  if (!sol.allFinite()) sol = g.completeOrthogonalDecomposition().solve(r);
  for (Eigen::Index a = 0; a < p; ++a) z(idx[a]) = sol(a);
  return z;
}

}  // namespace

Vector nnls_normal(const Matrix& gram, const Vector& atb) {
  const Eigen::Index n = gram.rows();
  if (gram.cols() != n || atb.size() != n) throw std::invalid_argument("nnls: shape mismatch");
  if (!gram.allFinite() || !atb.allFinite()) throw std::invalid_argument("nnls: non-finite input");

  const double tol = 1e-12 * std::max(1.0, gram.diagonal().cwiseAbs().maxCoeff()) *
                     std::max<Eigen::Index>(n, 1);
  std::vector<bool> passive(n, false);
  Vector x = Vector::Zero(n);
  const int max_outer = 30 * static_cast<int>(std::max<Eigen::Index>(n, 1)) + 30;

  for (int outer = 0; outer < max_outer; ++outer) {
    Vector w = atb - gram * x;
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!passive[i] && w(i) > best_w) {
        best_w = w(i);
        best = i;
      }
    }
    if (best < 0) return x;
    passive[best] = true;

    for (int inner = 0; inner <= 3 * n + 3; ++inner) {
      Vector z = solve_passive(gram, atb, passive);
      bool feasible = true;
      for (Eigen::Index i = 0; i < n; ++i)
        if (passive[i] && z(i) <= 0.0) feasible = false;
      if (feasible) {
        x = z;
        break;
      }
      double alpha = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < n; ++i) {
        if (passive[i] && z(i) <= 0.0) {
          const double denom = x(i) - z(i);
          const double a = denom > 0.0 ? x(i) / denom : 0.0;
          alpha = std::min(alpha, a);
        }
      }
      x += alpha * (z - x);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (passive[i] && x(i) <= tol) {
          passive[i] = false;
          x(i) = 0.0;
        }
      }
    }
  }
  throw NumericalFailure("nnls: iteration cap exceeded");
}

Vector nnls(const Matrix& a, const Vector& b) {
  if (a.rows() != b.size()) throw std::invalid_argument("nnls: rows of A must equal |b|");
  return nnls_normal(a.transpose() * a, a.transpose() * b);
}

}  // namespace bssnmr
