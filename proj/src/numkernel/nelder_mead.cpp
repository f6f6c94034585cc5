#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "bssnmr/numkernel.hpp"

namespace bssnmr {

NelderMeadResult nelder_mead(const Objective& objective, std::vector<double> x0,
                             const NelderMeadOptions& opt) {
  const std::size_t n = x0.size();
  if (n == 0) throw std::invalid_argument("nelder_mead: empty start point");
  const double f0 = objective(x0);
  if (!std::isfinite(f0)) throw std::invalid_argument("nelder_mead: objective not finite at x0");

  // Initial simplex: 5% steps on nonzero coordinates, small absolute step on zeros.
  std::vector<std::vector<double>> pts(n + 1, x0);
  std::vector<double> fv(n + 1);
  fv[0] = f0;
  for (std::size_t i = 0; i < n; ++i) {
    pts[i + 1][i] = x0[i] != 0.0 ? 1.05 * x0[i] : 0.00025;
    fv[i + 1] = objective(pts[i + 1]);
  }

  std::vector<std::size_t> order(n + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    std::vector<std::vector<double>> p2(n + 1);
    std::vector<double> f2(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      p2[i] = std::move(pts[order[i]]);
      f2[i] = fv[order[i]];
    }
    pts = std::move(p2);
    fv = std::move(f2);
  };
  auto point_along = [&](const std::vector<double>& c, double t) {
    // c + t * (c - worst)
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = c[j] + t * (c[j] - pts[n][j]);
    return out;
  };

  NelderMeadResult res;
  sort_simplex();
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    double xspread = 0.0, fspread = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      fspread = std::max(fspread, std::abs(fv[i] - fv[0]));
      for (std::size_t j = 0; j < n; ++j) xspread = std::max(xspread, std::abs(pts[i][j] - pts[0][j]));
    }
    if (xspread <= opt.x_tolerance && fspread <= opt.f_tolerance) {
      res.converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[i][j] / static_cast<double>(n);

    auto xr = point_along(centroid, opt.reflection);
    const double fr = objective(xr);
    if (fr < fv[0]) {
      auto xe = point_along(centroid, opt.reflection * opt.expansion);
      const double fe = objective(xe);
      if (fe < fr) {
        pts[n] = std::move(xe);
        fv[n] = fe;
      } else {
        pts[n] = std::move(xr);
        fv[n] = fr;
      }
    } else if (fr < fv[n - 1]) {
      pts[n] = std::move(xr);
      fv[n] = fr;
    } else {
      bool shrink = false;
      if (fr < fv[n]) {
        auto xc = point_along(centroid, opt.reflection * opt.contraction);
        const double fc = objective(xc);
        if (fc <= fr) {
          pts[n] = std::move(xc);
          fv[n] = fc;
        } else {
          shrink = true;
        }
      } else {
        auto xcc = point_along(centroid, -opt.contraction);
        const double fcc = objective(xcc);
        if (fcc < fv[n]) {
          pts[n] = std::move(xcc);
          fv[n] = fcc;
        } else {
          shrink = true;
        }
      }
      if (shrink) {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t j = 0; j < n; ++j) pts[i][j] = pts[0][j] + opt.shrink * (pts[i][j] - pts[0][j]);
          fv[i] = objective(pts[i]);
        }
      }
    }
    sort_simplex();
  }

  res.x = pts[0];
  res.f = fv[0];
  res.iterations = it;
  return res;
}

}  // namespace bssnmr
