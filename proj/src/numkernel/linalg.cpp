#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "bssnmr/numkernel.hpp"

namespace bssnmr {

bool all_finite(const Matrix& m) { return m.allFinite(); }

SvdResult svd(const Matrix& m) {
  if (!all_finite(m)) throw std::invalid_argument("svd: non-finite input");
  if (m.size() == 0) throw std::invalid_argument("svd: empty matrix");

  // Eigen's one-sided Jacobi is slow for wide matrices; factor the tall
  // orientation and swap factors back.
  const bool wide = m.cols() > m.rows();
  Eigen::JacobiSVD<Matrix, Eigen::ColPivHouseholderQRPreconditioner> solver(
      wide ? Matrix(m.transpose()) : m, Eigen::ComputeThinU | Eigen::ComputeThinV);

  SvdResult out;
  out.s = solver.singularValues();
  if (wide) {
    out.u = solver.matrixV();
    out.vt = solver.matrixU().transpose();
  } else {
    out.u = solver.matrixU();
    out.vt = solver.matrixV().transpose();
  }
  if (!out.u.allFinite() || !out.vt.allFinite() || !out.s.allFinite()) {
    throw NumericalFailure("svd: decomposition did not converge");
  }
  return out;
}

EigResult sym_eig(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("sym_eig: matrix is not square");
  if (!all_finite(m)) throw std::invalid_argument("sym_eig: non-finite input");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("sym_eig: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success) throw NumericalFailure("sym_eig: no convergence");

  // Eigen returns ascending order.
  const Eigen::Index n = m.rows();
  EigResult out{Vector(n), Matrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = solver.eigenvalues()(n - 1 - i);
    out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  return out;
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> key) {
  // splitmix64 finalizer folded over the key path
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(master);
  for (std::uint64_t k : key) h = mix(h ^ mix(k));
  return h;
}

}  // namespace bssnmr
