#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "bssnmr/io.hpp"

namespace bssnmr {

namespace {
constexpr double kWidth = 800, kHeight = 400, kMargin = 30;

std::string polyline(std::span<const double> y, double lo, double hi, const char* colour, double stroke) {
  std::ostringstream os;
  os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"" << stroke << "\" points=\"";
  const double span = hi > lo ? hi - lo : 1.0;
  char buf[48];
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double px = kMargin + (kWidth - 2 * kMargin) * (y.size() > 1 ? double(i) / (y.size() - 1) : 0.0);
    const double py = kHeight - kMargin - (kHeight - 2 * kMargin) * (y[i] - lo) / span;
    std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px, py);
    os << buf;
  }
  os << "\"/>\n";
  return os.str();
}
}  // namespace

std::string overlay_svg(std::span<const double> predicted, std::span<const double> pure, const PairFit& fit,
                        const std::string& title) {
  // Map the prediction onto the pure component's scale: (p - B) / M.
  std::vector<double> mapped(predicted.begin(), predicted.end());
  if (fit.multiplier != 0.0)
    for (double& v : mapped) v = (v - fit.offset) / fit.multiplier;

  double lo = 0.0, hi = 0.0;
  for (double v : pure) lo = std::min(lo, v), hi = std::max(hi, v);
  for (double v : mapped)
    if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kMargin << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  os << polyline(pure, lo, hi, "red", 3.0);
  os << polyline(mapped, lo, hi, "black", 1.5);
  os << "</svg>\n";
  return os.str();
}

}  // namespace bssnmr
