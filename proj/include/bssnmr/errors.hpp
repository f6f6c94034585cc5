#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bssnmr {

// Iterative kernel failed to converge or produced non-finite output.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A separation technique produced no usable components for a setting.
class TechniqueFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Row of a dataset is all zeros where a normalization needs a scale.
class DegenerateRowError : public std::invalid_argument {
 public:
  explicit DegenerateRowError(std::size_t row)
      : std::invalid_argument("row " + std::to_string(row) + " is all zeros"),
        row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

// Affine fit against a constant reference spectrum is undetermined.
class DegenerateFitError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Statistic requested over an empty or zero-valued set.
class UndefinedErrorSignal : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace bssnmr
