#include <cmath>
#include <stdexcept>

#include "internal.hpp"

namespace bssnmr {

namespace {

constexpr double kRidge = 1e-10;

// Solve g z = rhs for symmetric g, falling back to a small ridge when g is
// numerically singular.
Matrix solve_gram(const Matrix& g, const Matrix& rhs, bool& ridged) {
  Eigen::LDLT<Matrix> ldlt(g);
  const double dmax = ldlt.vectorD().cwiseAbs().maxCoeff();
  const double dmin = ldlt.vectorD().cwiseAbs().minCoeff();
  if (ldlt.info() == Eigen::Success && dmax > 0.0 && dmin > 1e-13 * dmax) return ldlt.solve(rhs);
  ridged = true;
  const double scale = std::max(g.trace() / static_cast<double>(g.rows()), 1e-300);
  Matrix gr = g;
  gr.diagonal().array() += kRidge * scale;
  return gr.ldlt().solve(rhs);
}

}  // namespace

// Multivariate curve resolution by alternating regression:
// concentrations given spectra, then spectra given concentrations.
ComponentSet mcr(const Matrix& x, int k, McrRegression regression, McrInit init, std::uint64_t seed,
                 const McrOptions& opt) {
  detail::require_k(x, k, "mcr");
  const bool constrained = regression == McrRegression::nnls;
  const NonnegativePrep prep = prepare_nonnegative(x, constrained, constrained);
  const Matrix& xd = prep.data;
  const double total = xd.squaredNorm();
  if (total == 0.0) throw TechniqueFailure("mcr: data matrix is zero");

  Matrix st;
  if (init == McrInit::provided) {
    if (opt.init_components) {
      if (opt.init_components->rows() != k || opt.init_components->cols() != x.cols())
        throw std::invalid_argument("mcr: provided initial components must be k x n_points");
      st = *opt.init_components;
    } else {
      st = svd(xd).vt.topRows(k).cwiseAbs();
    }
  } else {
    Rng rng(seed);
    st.resize(k, x.cols());
    for (Eigen::Index i = 0; i < st.size(); ++i) st.data()[i] = rng.uniform();
  }

  if (opt.residual_trace) opt.residual_trace->clear();
  bool ridged = false;
  bool converged = false;
  double previous = std::numeric_limits<double>::infinity();
  Matrix c(x.rows(), k);
  int it = 0;
  for (; it < opt.max_iterations;) {
    ++it;
    const Matrix g_st = st * st.transpose();
    if (constrained) {
      const Matrix xst = xd * st.transpose();  // rows x k
      for (Eigen::Index r = 0; r < xd.rows(); ++r) {
        Matrix g = g_st;
        const double dmax = g.diagonal().maxCoeff();
        if (!(g.diagonal().minCoeff() > 1e-13 * dmax)) {
          g.diagonal().array() += kRidge * std::max(g.trace() / k, 1e-300);
          ridged = true;
        }
        c.row(r) = nnls_normal(g, xst.row(r).transpose()).transpose();
      }
    } else {
      c = solve_gram(g_st, st * xd.transpose(), ridged).transpose();
    }
    st = solve_gram(c.transpose() * c, c.transpose() * xd, ridged);

    const double residual = (xd - c * st).squaredNorm() / total;
    if (opt.residual_trace) opt.residual_trace->push_back(residual);
    if (!std::isfinite(residual)) throw TechniqueFailure("mcr: regression diverged");
    if (std::abs(previous - residual) < opt.tolerance) {
      converged = true;
      break;
    }
    previous = residual;
  }

  ComponentSet set;
  set.k_requested = k;
  set.components = st;
  set.coefficients = c;
  set.converged = converged;
  set.metadata["iterations"] = it;
  set.metadata["ridge_fallback"] = ridged;
  if (constrained) undo_nonnegative_prep(prep, set);
  return set;
}

}  // namespace bssnmr
