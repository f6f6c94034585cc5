#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bssnmr/numkernel.hpp"
#include "bssnmr/synth.hpp"

namespace bssnmr {

enum class Family { svd, truncated_svd, pca, fastica, jade, sobi, vca, nnmf, simplisma, mcr };
enum class NnmfInit { random, nndsvd, nndsvda, nndsvdar };
enum class McrRegression { ols_als, nnls };
enum class McrInit { provided, random };

/// Technique plus its family-specific variant. String form is stable, e.g.
/// `pca`, `nnmf:nndsvdar`, `simplisma:offset8`, `mcr:nnls:random`.
struct TechniqueId {
  Family family = Family::svd;
  NnmfInit nnmf_init = NnmfInit::nndsvd;
  int simplisma_offset = 0;
  McrRegression mcr_regression = McrRegression::ols_als;
  McrInit mcr_init = McrInit::provided;

  std::string str() const;
  /// Family name, except MCR whose variants are reported individually.
  std::string group() const;
  static TechniqueId parse(const std::string& s);
  /// Every supported identifier, in report order.
  static std::vector<TechniqueId> roster();
  static std::string roster_text();

  bool operator==(const TechniqueId& o) const { return str() == o.str(); }
  bool operator<(const TechniqueId& o) const { return str() < o.str(); }
};

inline constexpr int kSimplismaOffsets[] = {0, 2, 8, 12, 15};

/// Output of one separation. The data matrix X (rows = spectra) is modelled as
///   X ~ coefficients * components + row_offset * 1^T + 1 * column_offset^T.
/// Component sign and scale are arbitrary.
struct ComponentSet {
  Matrix components;    // k x n_points
  Matrix coefficients;  // rows x k
  Vector row_offset;    // rows, may be empty (zero)
  Vector column_offset; // n_points, may be empty (zero)
  TechniqueId technique;
  int k_requested = 0;
  bool converged = true;
  double runtime_seconds = 0.0;
  nlohmann::json metadata = nlohmann::json::object();

  int k() const { return static_cast<int>(components.rows()); }
  Matrix reconstruct() const;
};

struct FastIcaOptions {
  double tolerance = 1e-6;
  int max_iterations = 400;
};

struct NnmfOptions {
  bool flip_rows = true;      // invert rows with more negative than positive intensity
  bool global_offset = true;  // then shift the matrix to be nonnegative
  double tolerance = 1e-6;    // projected-gradient violation relative to the first sweep
  int max_iterations = 1000;
  std::vector<double>* objective_trace = nullptr;  // filled with 0.5||X - WH||^2 per sweep
};

struct McrOptions {
  double tolerance = 1e-8;  // change in relative residual between iterations
  int max_iterations = 500;
  std::optional<Matrix> init_components;  // k x n_points when init = provided
  std::vector<double>* residual_trace = nullptr;
};

struct BssOptions {
  FastIcaOptions fastica;
  std::vector<int> sobi_lags{1, 2, 3, 4, 5};
  NnmfOptions nnmf;
  McrOptions mcr;
};

// Family entry points operate on a plain data matrix (rows = spectra).

enum class SvdMode { full, truncated, centered };
ComponentSet svd_like(const Matrix& x, int k, SvdMode mode);
ComponentSet fastica(const Matrix& x, int k, std::uint64_t seed, const FastIcaOptions& opt = {});
ComponentSet jade(const Matrix& x, int k);
ComponentSet sobi(const Matrix& x, int k, const std::vector<int>& lags);
ComponentSet vca(const Matrix& x, int k, std::uint64_t seed);
ComponentSet nnmf(const Matrix& x, int k, NnmfInit init, std::uint64_t seed, const NnmfOptions& opt = {});
ComponentSet simplisma(const Matrix& x, int k, double offset_percent);
ComponentSet mcr(const Matrix& x, int k, McrRegression regression, McrInit init, std::uint64_t seed,
                 const McrOptions& opt = {});

/// Starting factors x ~ w h for the given initialization scheme.
void nnmf_initial_factors(const Matrix& x, int k, NnmfInit init, std::uint64_t seed, Matrix& w, Matrix& h);

/// Sign flips and baseline shift applied before nonnegative factorizations.
struct NonnegativePrep {
  Matrix data;               // preprocessed, elementwise >= 0 when offset applied
  std::vector<int> flipped;  // row indices that were inverted
  double offset = 0.0;
  Vector sign;               // +-1 per row
};
NonnegativePrep prepare_nonnegative(const Matrix& x, bool flip_rows, bool global_offset);

/// Map factors of the preprocessed matrix back to a model of the raw data.
void undo_nonnegative_prep(const NonnegativePrep& prep, ComponentSet& set);

/// Run `technique` on the dataset's spectra and keep k components.
/// Non-convergence is reported through `converged`; a technique that yields
/// no usable component throws TechniqueFailure.
ComponentSet decompose(const MixtureDataset& dataset, const TechniqueId& technique, int k,
                       std::uint64_t seed, const BssOptions& options = {});
ComponentSet decompose(const Matrix& x, const TechniqueId& technique, int k, std::uint64_t seed,
                       const BssOptions& options = {});

}  // namespace bssnmr
