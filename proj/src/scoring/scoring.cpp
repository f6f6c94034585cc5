#include "bssnmr/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace bssnmr {

PairFit fit_pair(std::span<const double> predicted, std::span<const double> pure) {
  const std::size_t n = predicted.size();
  if (n != pure.size()) throw std::invalid_argument("fit_pair: length mismatch");
  if (n < 2) throw std::invalid_argument("fit_pair: need at least two points");

  double mp = 0.0, mq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mp += predicted[i];
    mq += pure[i];
  }
  mp /= static_cast<double>(n);
  mq /= static_cast<double>(n);
  double sqq = 0.0, spq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dq = pure[i] - mq;
    sqq += dq * dq;
    spq += (predicted[i] - mp) * dq;
  }
  if (!(sqq > 0.0)) throw DegenerateFitError("fit_pair: pure spectrum is constant");

  PairFit fit;
  fit.multiplier = spq / sqq;
  fit.offset = mp - fit.multiplier * mq;
  double lof = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = predicted[i] - (fit.offset + fit.multiplier * pure[i]);
    lof += r * r;
  }
  fit.lack_of_fit = lof;
  return fit;
}

double normalized_lack_of_fit(std::span<const double> predicted, std::span<const double> pure) {
  const PairFit fit = fit_pair(predicted, pure);
  const double mean = std::accumulate(predicted.begin(), predicted.end(), 0.0) / predicted.size();
  double energy = 0.0;
  for (double v : predicted) energy += (v - mean) * (v - mean);
  return energy > 0.0 ? fit.lack_of_fit / energy : 1.0;
}

std::vector<double> standardize(std::span<const double> predicted) {
  std::vector<double> out(predicted.begin(), predicted.end());
  if (out.empty()) return out;
  const double mean = std::accumulate(out.begin(), out.end(), 0.0) / out.size();
  double energy = 0.0;
  for (double v : out) energy += (v - mean) * (v - mean);
  if (!(energy > 0.0)) return out;
  const double scale = std::sqrt(static_cast<double>(out.size()) / energy);
  for (double& v : out) v *= scale;
  return out;
}

Matrix lack_of_fit_matrix(const Matrix& predicted, const Matrix& pures) {
  if (predicted.cols() != pures.cols()) throw std::invalid_argument("scoring: spectrum lengths differ");
  const Eigen::Index n = predicted.cols();
  Matrix lof(predicted.rows(), pures.rows());
  std::vector<double> pure_row(static_cast<std::size_t>(n));
  for (Eigen::Index p = 0; p < predicted.rows(); ++p) {
    const Eigen::RowVectorXd row = predicted.row(p);
    const std::vector<double> std_pred = standardize(std::span<const double>(row.data(), row.size()));
    const double mean = std::accumulate(std_pred.begin(), std_pred.end(), 0.0) / n;
    const bool constant = std::all_of(std_pred.begin(), std_pred.end(), [&](double v) { return v == mean; });
    for (Eigen::Index q = 0; q < pures.rows(); ++q) {
      if (constant) {
        lof(p, q) = static_cast<double>(n);
        continue;
      }
      for (Eigen::Index i = 0; i < n; ++i) pure_row[i] = pures(q, i);
      lof(p, q) = fit_pair(std_pred, pure_row).lack_of_fit;
    }
  }
  return lof;
}

MatchReport best_assignment(const Matrix& predicted, const Matrix& pures) {
  if (predicted.rows() < 1 || pures.rows() < 1)
    throw std::invalid_argument("best_assignment: need at least one predicted and one pure component");
  const Matrix lof = lack_of_fit_matrix(predicted, pures);
  const Matrix score = lof.cwiseMax(kZeroFitFloor).cwiseInverse();
  const Assignment a = assign_max(score);

  MatchReport report;
  report.n_points = static_cast<int>(predicted.cols());
  std::vector<bool> pred_used(predicted.rows(), false), pure_used(pures.rows(), false);
  for (const auto& [p, q] : a.pairs) {
    // Recompute the fit to report B and M alongside the residual.
    const Eigen::RowVectorXd row = predicted.row(p);
    const std::vector<double> std_pred = standardize(std::span<const double>(row.data(), row.size()));
    const Eigen::RowVectorXd pure_row = pures.row(q);
    MatchedPair mp;
    mp.predicted = p;
    mp.pure = q;
    try {
      mp.fit = fit_pair(std_pred, std::span<const double>(pure_row.data(), pure_row.size()));
    } catch (const DegenerateFitError&) {
      throw;
    }
    mp.fit.lack_of_fit = lof(p, q);
    report.ensemble_score += score(p, q);
    report.pairs.push_back(mp);
    pred_used[p] = true;
    pure_used[q] = true;
  }
  for (Eigen::Index p = 0; p < predicted.rows(); ++p)
    if (!pred_used[p]) report.discarded_predicted.push_back(static_cast<int>(p));
  for (Eigen::Index q = 0; q < pures.rows(); ++q)
    if (!pure_used[q]) report.unmatched_pure.push_back(static_cast<int>(q));
  report.dataset_error = dataset_error(report, report.n_points);
  return report;
}

MatchReport best_assignment(const ComponentSet& predicted, std::span<const PureComponent> pures) {
  return best_assignment(predicted.components, pure_matrix(pures));
}

double dataset_error(const MatchReport& report, int n_points) {
  if (report.pairs.empty()) throw UndefinedErrorSignal("dataset_error: no matched pairs");
  if (n_points < 1) throw std::invalid_argument("dataset_error: n_points must be positive");
  double sum = 0.0;
  for (const auto& p : report.pairs) sum += p.fit.lack_of_fit / n_points;
  return sum / static_cast<double>(report.pairs.size());
}

double overprediction_ratio(std::span<const double> exact, std::span<const double> plus) {
  if (exact.empty() || plus.empty()) throw UndefinedErrorSignal("overprediction_ratio: empty error list");
  const double me = std::accumulate(exact.begin(), exact.end(), 0.0) / exact.size();
  const double mp = std::accumulate(plus.begin(), plus.end(), 0.0) / plus.size();
  if (me == 0.0) throw UndefinedErrorSignal("overprediction_ratio: zero mean error at exact k");
  return mp / me;
}

}  // namespace bssnmr
