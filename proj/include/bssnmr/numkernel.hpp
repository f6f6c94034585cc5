#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bssnmr/errors.hpp"

namespace bssnmr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Dense decompositions
// ---------------------------------------------------------------------------

/// Thin singular value decomposition, m = u * diag(s) * vt, s descending.
struct SvdResult {
  Matrix u;   // rows x r
  Vector s;   // r
  Matrix vt;  // r x cols
};

SvdResult svd(const Matrix& m);

/// Eigenpairs of a symmetric matrix, eigenvalues descending; eigenvectors
/// are the columns of `vectors`.
struct EigResult {
  Vector values;
  Matrix vectors;
};

EigResult sym_eig(const Matrix& m);

bool all_finite(const Matrix& m);

// ---------------------------------------------------------------------------
// Non-negative least squares
// ---------------------------------------------------------------------------

/// argmin ||a x - b||^2 subject to x >= 0 (Lawson-Hanson active set).
Vector nnls(const Matrix& a, const Vector& b);

/// Same problem posed through the normal equations: gram = a^T a,
/// atb = a^T b. Lets callers reuse the Gram matrix across right-hand sides.
Vector nnls_normal(const Matrix& gram, const Vector& atb);

// ---------------------------------------------------------------------------
// Nelder-Mead simplex
// ---------------------------------------------------------------------------

struct NelderMeadOptions {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  double x_tolerance = 1e-8;
  double f_tolerance = 1e-8;
  int max_iterations = 2000;
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

NelderMeadResult nelder_mead(const Objective& objective,
                             std::vector<double> x0,
                             const NelderMeadOptions& options = {});

// ---------------------------------------------------------------------------
// Joint approximate diagonalization (Jacobi rotations)
// ---------------------------------------------------------------------------

struct JointDiagResult {
  Matrix v;                          // orthogonal, columns are the common basis
  std::vector<double> off_history;   // off-diagonal energy before sweep 1, after each sweep
  int sweeps = 0;
  bool converged = false;
};

/// Sum over all matrices of the squared off-diagonal entries of v^T m v.
double off_diagonal_energy(std::span<const Matrix> matrices, const Matrix& v);

JointDiagResult joint_diagonalize(std::span<const Matrix> matrices,
                                  double threshold = 1e-12,
                                  int max_sweeps = 100);

// ---------------------------------------------------------------------------
// Rectangular maximum-weight assignment
// ---------------------------------------------------------------------------

struct Assignment {
  // (row, col) pairs sorted by row; min(rows, cols) entries.
  std::vector<std::pair<int, int>> pairs;
  double objective = 0.0;
};

/// Exact maximum-weight one-to-one assignment (Hungarian method with
/// potentials). Rows and columns may differ in count.
Assignment assign_max(const Matrix& score);

// ---------------------------------------------------------------------------
// Random numbers
// ---------------------------------------------------------------------------

/// Seedable generator; one instance per independent stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double gaussian() { return normal_(engine_); }
  /// Uniform integer on [0, n).
  std::size_t below(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Derive an independent stream seed from a master seed and a key path.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> key);

}  // namespace bssnmr
