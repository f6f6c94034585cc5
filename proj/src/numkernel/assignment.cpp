#include <algorithm>
#include <limits>
#include <stdexcept>

#include "bssnmr/numkernel.hpp"

namespace bssnmr {

namespace {

// Shortest augmenting path Hungarian method on an n x m cost matrix with
// n <= m. Returns, for each row, the assigned column.
std::vector<int> hungarian_min(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);

  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

Assignment assign_max(const Matrix& score) {
  if (!score.allFinite()) throw std::invalid_argument("assign_max: non-finite score");
  Assignment out;
  if (score.rows() == 0 || score.cols() == 0) return out;

  const bool transposed = score.rows() > score.cols();
  // Shift to nonnegative costs; the optimum is invariant to the constant.
  const Matrix s = transposed ? Matrix(score.transpose()) : score;
  const Matrix cost = Matrix::Constant(s.rows(), s.cols(), s.maxCoeff()) - s;
  const std::vector<int> match = hungarian_min(cost);

  for (int r = 0; r < static_cast<int>(match.size()); ++r) {
    if (transposed) out.pairs.emplace_back(match[r], r);
    else out.pairs.emplace_back(r, match[r]);
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  for (const auto& [r, c] : out.pairs) out.objective += score(r, c);
  return out;
}

}  // namespace bssnmr
