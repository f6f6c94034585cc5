#include <cmath>

#include "internal.hpp"

namespace bssnmr {

ComponentSet svd_like(const Matrix& x, int k, SvdMode mode) {
  detail::require_k(x, k, "svd");
  ComponentSet set;
  set.k_requested = k;

  switch (mode) {
    case SvdMode::full: {
      // All min(rows, cols) components are computed; only the top k are kept.
      const SvdResult d = svd(x);
      set.components = d.vt.topRows(k);
      set.coefficients = d.u.leftCols(k) * d.s.head(k).asDiagonal();
      set.metadata["singular_values"] = std::vector<double>(d.s.data(), d.s.data() + d.s.size());
      break;
    }
    case SvdMode::truncated: {
      // Top-k eigenpairs of the small Gram matrix; right vectors by projection.
      const EigResult e = sym_eig(x * x.transpose());
      const double lead = std::max(e.values(0), 0.0);
      set.components.resize(k, x.cols());
      set.coefficients.resize(x.rows(), k);
      std::optional<SvdResult> fallback;
      for (int i = 0; i < k; ++i) {
        const double s = std::sqrt(std::max(e.values(i), 0.0));
        if (s > 1e-7 * std::sqrt(lead) && s > 0.0) {
          set.components.row(i) = (x.transpose() * e.vectors.col(i)).transpose() / s;
          set.coefficients.col(i) = e.vectors.col(i) * s;
        } else {
          // Null directions carry no signal; take an orthonormal completion.
          if (!fallback) fallback = svd(x);
          set.components.row(i) = fallback->vt.row(i);
          set.coefficients.col(i) = fallback->u.col(i) * fallback->s(i);
          set.metadata["rank_deficient"] = true;
        }
      }
      break;
    }
    case SvdMode::centered: {
      const Vector mean = x.colwise().mean().transpose();
      const SvdResult d = svd(x.rowwise() - mean.transpose());
      set.components = d.vt.topRows(k);
      set.coefficients = d.u.leftCols(k) * d.s.head(k).asDiagonal();
      set.column_offset = mean;
      const double total = d.s.squaredNorm();
      std::vector<double> ratio;
      for (int i = 0; i < k; ++i) ratio.push_back(total > 0 ? d.s(i) * d.s(i) / total : 0.0);
      set.metadata["explained_variance_ratio"] = ratio;
      break;
    }
  }
  return set;
}

}  // namespace bssnmr
