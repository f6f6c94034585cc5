#include "bssnmr/bss.hpp"

namespace bssnmr {

Matrix ComponentSet::reconstruct() const {
  Matrix r = coefficients * components;
  if (row_offset.size() == r.rows()) r.colwise() += row_offset;
  if (column_offset.size() == r.cols()) r.rowwise() += column_offset.transpose();
  return r;
}

}  // namespace bssnmr
