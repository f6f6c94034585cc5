#pragma once

#include "bssnmr/bss.hpp"

namespace bssnmr::detail {

// Rows of x are sensors (spectra); columns are samples (spectral points).
// z = k x n whitened signals with z z^T / n = I, and
// x ~ dewhiten * z + row_mean * 1^T.
struct Whitened {
  Matrix z;
  Matrix dewhiten;  // rows x k
  Vector row_mean;
  bool rank_deficient = false;
};

Whitened whiten_rows(const Matrix& x, int k);

// Give zero-mean sources back the part of the removed row means that the
// mixing matrix explains; only the unexplained remainder stays a row offset.
void restore_source_means(ComponentSet& set, const Vector& row_mean);

// Least-squares coefficients c minimising ||x - c s||_F.
Matrix least_squares_coefficients(const Matrix& x, const Matrix& s);

// Reorder components by descending coefficient-column energy.
void sort_by_energy(ComponentSet& set);

void require_k(const Matrix& x, int k, const char* who);

}  // namespace bssnmr::detail
