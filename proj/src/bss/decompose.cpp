#include <chrono>
#include <stdexcept>

#include "internal.hpp"

namespace bssnmr {

namespace {

ComponentSet dispatch(const Matrix& x, const TechniqueId& t, int k, std::uint64_t seed,
                      const BssOptions& opt) {
  switch (t.family) {
    case Family::svd: return svd_like(x, k, SvdMode::full);
    case Family::truncated_svd: return svd_like(x, k, SvdMode::truncated);
    case Family::pca: return svd_like(x, k, SvdMode::centered);
    case Family::fastica: return fastica(x, k, seed, opt.fastica);
    case Family::jade: return jade(x, k);
    case Family::sobi: return sobi(x, k, opt.sobi_lags);
    case Family::vca: return vca(x, k, seed);
    case Family::nnmf: return nnmf(x, k, t.nnmf_init, seed, opt.nnmf);
    case Family::simplisma: return simplisma(x, k, t.simplisma_offset);
    case Family::mcr: return mcr(x, k, t.mcr_regression, t.mcr_init, seed, opt.mcr);
  }
  throw std::invalid_argument("unknown technique family");
}

// Drop components that are non-finite or identically zero; they cannot be
// matched to anything.
void drop_dead_components(ComponentSet& set) {
  std::vector<int> keep, dropped;
  for (int i = 0; i < set.k(); ++i) {
    const bool ok = set.components.row(i).allFinite() && set.coefficients.col(i).allFinite() &&
                    set.components.row(i).squaredNorm() > 0.0;
    (ok ? keep : dropped).push_back(i);
  }
  if (dropped.empty()) return;
  if (keep.empty()) throw TechniqueFailure(set.technique.str() + ": no usable components");
  Matrix comp(static_cast<Eigen::Index>(keep.size()), set.components.cols());
  Matrix coef(set.coefficients.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    comp.row(static_cast<Eigen::Index>(i)) = set.components.row(keep[i]);
    coef.col(static_cast<Eigen::Index>(i)) = set.coefficients.col(keep[i]);
  }
  set.components = std::move(comp);
  set.coefficients = std::move(coef);
  set.metadata["dropped_components"] = dropped;
}

}  // namespace

ComponentSet decompose(const Matrix& x, const TechniqueId& technique, int k, std::uint64_t seed,
                       const BssOptions& options) {
  if (k < 1 || k > std::min(x.rows(), x.cols()))
    throw std::invalid_argument("decompose: k must be in [1, min(spectra, points)]");
  const auto start = std::chrono::steady_clock::now();
  ComponentSet set = dispatch(x, technique, k, seed, options);
  set.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  set.technique = technique;
  set.k_requested = k;
  if (set.k() > k) {
    // Families that return more than requested keep the leading k.
    set.components.conservativeResize(k, Eigen::NoChange);
    set.coefficients.conservativeResize(Eigen::NoChange, k);
  }
  drop_dead_components(set);
  return set;
}

ComponentSet decompose(const MixtureDataset& dataset, const TechniqueId& technique, int k,
                       std::uint64_t seed, const BssOptions& options) {
  return decompose(dataset.spectra, technique, k, seed, options);
}

}  // namespace bssnmr
