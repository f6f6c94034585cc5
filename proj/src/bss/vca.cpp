#include <cmath>

#include "internal.hpp"

namespace bssnmr {

namespace {

double estimate_snr(const Matrix& r, const Vector& r_mean, const Matrix& x_projected) {
  const double bands = static_cast<double>(r.rows());
  const double pixels = static_cast<double>(r.cols());
  const double p = static_cast<double>(x_projected.rows());
  const double p_y = r.squaredNorm() / pixels;
  const double p_x = x_projected.squaredNorm() / pixels + r_mean.squaredNorm();
  const double denom = p_y - p_x;
  if (!(denom > 0.0)) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(std::abs((p_x - p / bands * p_y) / denom));
}

}  // namespace

// Vertex component analysis (Nascimento & Bioucas-Dias). Spectra are the
// pixels and spectral points the bands; endmembers are simplex vertices.
ComponentSet vca(const Matrix& x, int k, std::uint64_t seed) {
  detail::require_k(x, k, "vca");
  const Matrix r = x.transpose();  // bands x pixels
  const Vector r_mean = r.rowwise().mean();
  const Matrix r_centered = r.colwise() - r_mean;

  const SvdResult dc = svd(r_centered);
  const Matrix x_p = dc.u.leftCols(k).transpose() * r_centered;
  const double snr = estimate_snr(r, r_mean, x_p);
  const double snr_threshold = 15.0 + 10.0 * std::log10(static_cast<double>(k));
  const bool projective = snr >= snr_threshold || k == 1;

  Matrix y;        // k x pixels, coordinates used for vertex search
  Matrix r_proj;   // bands x pixels, data in the signal subspace
  if (!projective) {
    const int d = k - 1;
    const Matrix ud = dc.u.leftCols(d);
    const Matrix xs = x_p.topRows(d);
    r_proj = (ud * xs).colwise() + r_mean;
    const double c = xs.colwise().norm().maxCoeff();
    y.resize(k, r.cols());
    y.topRows(d) = xs;
    y.row(d).setConstant(c);
  } else {
    const SvdResult du = svd(r);
    const Matrix ud = du.u.leftCols(k);
    const Matrix xs = ud.transpose() * r;
    r_proj = ud * xs;
    const Vector u = xs.rowwise().mean();
    y = xs;
    for (Eigen::Index j = 0; j < xs.cols(); ++j) {
      const double s = u.dot(xs.col(j));
      if (s != 0.0) y.col(j) /= s;
    }
  }

  Rng rng(seed);
  Matrix a = Matrix::Zero(k, k);
  a(k - 1, 0) = 1.0;
  std::vector<int> index(k, 0);
  for (int i = 0; i < k; ++i) {
    Vector w(k);
    for (int j = 0; j < k; ++j) w(j) = rng.gaussian();
    Vector f = w - a * a.completeOrthogonalDecomposition().pseudoInverse() * w;
    f /= f.norm();
    const Eigen::RowVectorXd v = f.transpose() * y;
    Eigen::Index best = 0;
    v.cwiseAbs().maxCoeff(&best);
    index[i] = static_cast<int>(best);
    a.col(i) = y.col(best);
  }

  ComponentSet set;
  set.k_requested = k;
  set.components.resize(k, x.cols());
  for (int i = 0; i < k; ++i) set.components.row(i) = r_proj.col(index[i]).transpose();
  set.coefficients = detail::least_squares_coefficients(x, set.components);
  set.metadata["vertex_rows"] = index;
  set.metadata["snr_db"] = std::isfinite(snr) ? snr : 1e300;
  set.metadata["projection"] = projective ? "projective" : "affine";
  return set;
}

}  // namespace bssnmr
