#include <cmath>
#include <stdexcept>

#include "bssnmr/numkernel.hpp"

namespace bssnmr {

double off_diagonal_energy(std::span<const Matrix> matrices, const Matrix& v) {
  double off = 0.0;
  for (const Matrix& m : matrices) {
    Matrix d = v.transpose() * m * v;
    off += d.squaredNorm() - d.diagonal().squaredNorm();
  }
  return off;
}

// Cardoso & Souloumiac Jacobi sweeps for real symmetric matrices. Each
// Givens angle is the closed-form minimizer of the pair's off-diagonal
// energy, so the total never increases.
JointDiagResult joint_diagonalize(std::span<const Matrix> matrices, double threshold,
                                  int max_sweeps) {
  if (matrices.empty()) throw std::invalid_argument("joint_diagonalize: no matrices");
  const Eigen::Index n = matrices.front().rows();
  for (const Matrix& m : matrices) {
    if (m.rows() != n || m.cols() != n)
      throw std::invalid_argument("joint_diagonalize: matrices must share one square shape");
  }

  std::vector<Matrix> work(matrices.begin(), matrices.end());
  JointDiagResult res;
  res.v = Matrix::Identity(n, n);
  res.off_history.push_back(off_diagonal_energy(matrices, res.v));

  // Rotations are norm-preserving, so this scale is fixed for the whole run.
  double scale = 0.0;
  for (const Matrix& m : matrices) scale += m.squaredNorm();
  const double negligible = 1e-26 * scale;

  auto off_now = [&] {
    double off = 0.0;
    for (const Matrix& m : work) off += m.squaredNorm() - m.diagonal().squaredNorm();
    return off;
  };

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        double g11 = 0.0, g12 = 0.0, g22 = 0.0;
        for (const Matrix& m : work) {
          const double a = m(p, p) - m(q, q);
          const double b = m(p, q) + m(q, p);
          g11 += a * a;
          g12 += a * b;
          g22 += b * b;
        }
        // The angle formula is scale-free; a pair whose coupling is pure
        // rounding noise would otherwise get an arbitrary rotation.
        if (g22 <= negligible) continue;
        const double ton = g11 - g22;
        const double toff = 2.0 * g12;
        const double theta = 0.5 * std::atan2(toff, ton + std::sqrt(ton * ton + toff * toff));
        const double c = std::cos(theta);
        const double s = std::sin(theta);
        if (std::abs(s) <= threshold) continue;
        rotated = true;

        for (Matrix& m : work) {
          // m <- G^T m G with G acting on columns p, q
          for (Eigen::Index i = 0; i < n; ++i) {
            const double mp = m(i, p), mq = m(i, q);
            m(i, p) = c * mp + s * mq;
            m(i, q) = -s * mp + c * mq;
          }
          for (Eigen::Index j = 0; j < n; ++j) {
            const double mp = m(p, j), mq = m(q, j);
            m(p, j) = c * mp + s * mq;
            m(q, j) = -s * mp + c * mq;
          }
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          const double vp = res.v(i, p), vq = res.v(i, q);
          res.v(i, p) = c * vp + s * vq;
          res.v(i, q) = -s * vp + c * vq;
        }
      }
    }
    ++res.sweeps;
    res.off_history.push_back(off_now());
    if (!rotated) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace bssnmr
