#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "internal.hpp"

namespace bssnmr::detail {

void require_k(const Matrix& x, int k, const char* who) {
  if (k < 1 || k > std::min(x.rows(), x.cols()))
    throw std::invalid_argument(std::string(who) + ": k must be in [1, min(rows, cols)]");
  if (!x.allFinite()) throw std::invalid_argument(std::string(who) + ": non-finite data");
}

Whitened whiten_rows(const Matrix& x, int k) {
  Whitened w;
  const double n = static_cast<double>(x.cols());
  w.row_mean = x.rowwise().mean();
  const Matrix xc = x.colwise() - w.row_mean;
  const SvdResult d = svd(xc);
  w.z = std::sqrt(n) * d.vt.topRows(k);
  w.dewhiten = d.u.leftCols(k) * (d.s.head(k) / std::sqrt(n)).asDiagonal();
  w.rank_deficient = d.s(k - 1) <= 1e-10 * std::max(d.s(0), 1e-300);
  return w;
}

void restore_source_means(ComponentSet& set, const Vector& row_mean) {
  const Vector source_mean = set.coefficients.completeOrthogonalDecomposition().solve(row_mean);
  set.components.colwise() += source_mean;
  set.row_offset = row_mean - set.coefficients * source_mean;
}

Matrix least_squares_coefficients(const Matrix& x, const Matrix& s) {
  // c s = x  <=>  s^T c^T = x^T
  return s.transpose().completeOrthogonalDecomposition().solve(x.transpose()).transpose();
}

void sort_by_energy(ComponentSet& set) {
  const int k = set.k();
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> energy(k);
  for (int i = 0; i < k; ++i)
    energy[i] = set.coefficients.col(i).squaredNorm() * set.components.row(i).squaredNorm();
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return energy[a] > energy[b]; });
  Matrix comp(set.components.rows(), set.components.cols());
  Matrix coef(set.coefficients.rows(), set.coefficients.cols());
  for (int i = 0; i < k; ++i) {
    comp.row(i) = set.components.row(order[i]);
    coef.col(i) = set.coefficients.col(order[i]);
  }
  set.components = std::move(comp);
  set.coefficients = std::move(coef);
}

}  // namespace bssnmr::detail
