#include <cmath>
#include <stdexcept>

#include "internal.hpp"

namespace bssnmr {

NonnegativePrep prepare_nonnegative(const Matrix& x, bool flip_rows, bool global_offset) {
  NonnegativePrep prep;
  prep.data = x;
  prep.sign = Vector::Ones(x.rows());
  if (flip_rows) {
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const double pos = x.row(r).cwiseMax(0.0).sum();
      const double neg = -x.row(r).cwiseMin(0.0).sum();
      if (neg > pos) {
        prep.data.row(r) *= -1.0;
        prep.sign(r) = -1.0;
        prep.flipped.push_back(static_cast<int>(r));
      }
    }
  }
  if (global_offset) {
    const double lo = prep.data.minCoeff();
    if (lo < 0.0) {
      prep.offset = -lo;
      prep.data.array() += prep.offset;
    }
  }
  return prep;
}

void undo_nonnegative_prep(const NonnegativePrep& prep, ComponentSet& set) {
  // x = D (x' - offset): coefficients pick up the row signs, the offset
  // becomes a signed per-row baseline.
  set.coefficients = prep.sign.asDiagonal() * set.coefficients;
  if (prep.offset != 0.0) set.row_offset = -prep.offset * prep.sign;
  set.metadata["flipped_rows"] = prep.flipped;
  set.metadata["baseline_offset"] = prep.offset;
}

namespace {

// One coordinate-descent sweep over the columns of w for x ~ w h, where
// hht = h h^T and xht = x h^T. Returns the projected-gradient violation.
double update_cd(Matrix& w, const Matrix& hht, const Matrix& xht) {
  double violation = 0.0;
  const Eigen::Index n = w.rows();
  const Eigen::Index k = w.cols();
  for (Eigen::Index t = 0; t < k; ++t) {
    const double hess = hht(t, t);
    for (Eigen::Index i = 0; i < n; ++i) {
      double grad = -xht(i, t);
      for (Eigen::Index r = 0; r < k; ++r) grad += w(i, r) * hht(r, t);
      const double pg = w(i, t) == 0.0 ? std::min(0.0, grad) : grad;
      violation += std::abs(pg);
      if (hess != 0.0) w(i, t) = std::max(w(i, t) - grad / hess, 0.0);
    }
  }
  return violation;
}

}  // namespace

void nnmf_initial_factors(const Matrix& x, int k, NnmfInit init, std::uint64_t seed, Matrix& w, Matrix& h) {
  const Eigen::Index n = x.rows();
  const Eigen::Index m = x.cols();
  Rng rng(seed);
  const double mean = x.mean();

  if (init == NnmfInit::random) {
    const double avg = std::sqrt(std::max(mean, 0.0) / k);
    h.resize(k, m);
    w.resize(n, k);
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < m; ++j) h(i, j) = avg * std::abs(rng.gaussian());
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < k; ++j) w(i, j) = avg * std::abs(rng.gaussian());
    return;
  }

  // Nonnegative double SVD (Boutsidis & Gallopoulos).
  const SvdResult d = svd(x);
  w = Matrix::Zero(n, k);
  h = Matrix::Zero(k, m);
  w.col(0) = std::sqrt(d.s(0)) * d.u.col(0).cwiseAbs();
  h.row(0) = std::sqrt(d.s(0)) * d.vt.row(0).cwiseAbs();
  for (int j = 1; j < k; ++j) {
    const Vector u = d.u.col(j);
    const Vector v = d.vt.row(j).transpose();
    const Vector up = u.cwiseMax(0.0), un = (-u).cwiseMax(0.0);
    const Vector vp = v.cwiseMax(0.0), vn = (-v).cwiseMax(0.0);
    const double upn = up.norm(), unn = un.norm(), vpn = vp.norm(), vnn = vn.norm();
    const double mp = upn * vpn, mn = unn * vnn;
    Vector uu, vv;
    double sigma;
    if (mp > mn) {
      uu = upn > 0 ? Vector(up / upn) : Vector(up);
      vv = vpn > 0 ? Vector(vp / vpn) : Vector(vp);
      sigma = mp;
    } else {
      uu = unn > 0 ? Vector(un / unn) : Vector(un);
      vv = vnn > 0 ? Vector(vn / vnn) : Vector(vn);
      sigma = mn;
    }
    const double lbd = std::sqrt(d.s(j) * sigma);
    w.col(j) = lbd * uu;
    h.row(j) = lbd * vv.transpose();
  }
  constexpr double eps = 1e-6;
  w = (w.array() < eps).select(0.0, w);
  h = (h.array() < eps).select(0.0, h);

  if (init == NnmfInit::nndsvda) {
    w = (w.array() == 0.0).select(mean, w);
    h = (h.array() == 0.0).select(mean, h);
  } else if (init == NnmfInit::nndsvdar) {
    for (Eigen::Index i = 0; i < w.size(); ++i)
      if (w.data()[i] == 0.0) w.data()[i] = std::abs(mean) * rng.uniform() / 100.0;
    for (Eigen::Index i = 0; i < h.size(); ++i)
      if (h.data()[i] == 0.0) h.data()[i] = std::abs(mean) * rng.uniform() / 100.0;
  }
}

// Frobenius-loss NMF by cyclic coordinate descent (Hsieh & Dhillon),
// alternating over W and H.
ComponentSet nnmf(const Matrix& x, int k, NnmfInit init, std::uint64_t seed, const NnmfOptions& opt) {
  detail::require_k(x, k, "nnmf");
  const NonnegativePrep prep = prepare_nonnegative(x, opt.flip_rows, opt.global_offset);
  const Matrix& xp = prep.data;
  if (xp.minCoeff() < 0.0) throw TechniqueFailure("nnmf: data still has negative entries after preprocessing");

  Matrix w, h;
  nnmf_initial_factors(xp, k, init, seed, w, h);

  auto objective = [&] { return 0.5 * (xp - w * h).squaredNorm(); };
  if (opt.objective_trace) {
    opt.objective_trace->clear();
    opt.objective_trace->push_back(objective());
  }

  Matrix ht = h.transpose();
  double violation_init = 0.0;
  bool converged = false;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    double violation = update_cd(w, ht.transpose() * ht, xp * ht);
    violation += update_cd(ht, w.transpose() * w, xp.transpose() * w);
    if (opt.objective_trace) {
      h = ht.transpose();
      opt.objective_trace->push_back(objective());
    }
    if (it == 0) violation_init = violation;
    if (violation_init == 0.0 || violation / violation_init <= opt.tolerance) {
      converged = true;
      ++it;
      break;
    }
  }
  h = ht.transpose();

  ComponentSet set;
  set.k_requested = k;
  set.components = h;
  set.coefficients = w;
  set.converged = converged;
  set.metadata["iterations"] = it;
  set.metadata["init"] = TechniqueId{Family::nnmf, init}.str();
  set.metadata["row_inversion"] = opt.flip_rows;
  set.metadata["global_offset"] = opt.global_offset;
  undo_nonnegative_prep(prep, set);
  return set;
}

}  // namespace bssnmr
