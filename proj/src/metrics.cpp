#include "mpgrade/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mpgrade {
namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

double BinaryConfusion::accuracy() const { return ratio(tp + tn, total()); }
double BinaryConfusion::precision() const { return ratio(tp, tp + fp); }
double BinaryConfusion::recall() const { return ratio(tp, tp + fn); }
double BinaryConfusion::specificity() const { return ratio(tn, tn + fp); }

BinaryConfusion confusion(std::span<const BinaryPrediction> preds) {
  BinaryConfusion c;
  for (const auto& p : preds) {
    if (p.truth == 1) {
      (p.predicted == 1 ? c.tp : c.fn)++;
    } else {
      (p.predicted == 1 ? c.fp : c.tn)++;
    }
  }
  return c;
}

double ars(double recall, double accuracy) { return std::sqrt(recall * accuracy); }

double f_beta(double precision, double recall, double beta) {
  const double b2 = beta * beta;
  const double den = b2 * precision + recall;
  if (den == 0) return 0.0;
  return (1 + b2) * precision * recall / den;
}

double auc(std::span<const BinaryPrediction> preds) {
  std::vector<std::pair<double, int>> scored;
  scored.reserve(preds.size());
  std::size_t positives = 0;
  for (const auto& p : preds) {
    scored.emplace_back(p.score, p.truth);
    positives += p.truth == 1;
  }
  const std::size_t negatives = preds.size() - positives;
  if (positives == 0 || negatives == 0) throw std::invalid_argument("AUC needs both classes");
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  double wins = 0;
  std::size_t neg_below = 0;
  for (std::size_t g = 0; g < scored.size();) {
    std::size_t end = g, pos = 0, neg = 0;
    while (end < scored.size() && scored[end].first == scored[g].first) {
      (scored[end].second == 1 ? pos : neg)++;
      ++end;
    }
    wins += static_cast<double>(pos) * (static_cast<double>(neg_below) + 0.5 * static_cast<double>(neg));
    neg_below += neg;
    g = end;
  }
  return wins / (static_cast<double>(positives) * static_cast<double>(negatives));
}

std::vector<double> gaussian_smooth(std::span<const double> series, double sigma) {
  if (sigma < 0) throw std::invalid_argument("sigma must be >= 0");
  std::vector<double> out(series.begin(), series.end());
  if (sigma == 0 || series.empty()) return out;
  const auto radius = static_cast<long long>(4.0 * sigma + 0.5);
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  for (long long x = -radius; x <= radius; ++x)
    kernel[static_cast<std::size_t>(x + radius)] = std::exp(-0.5 * static_cast<double>(x * x) / (sigma * sigma));
  const double norm = std::accumulate(kernel.begin(), kernel.end(), 0.0);
  for (auto& k : kernel) k /= norm;

  const auto n = static_cast<long long>(series.size());
  for (long long t = 0; t < n; ++t) {
    double acc = 0;
    for (long long x = -radius; x <= radius; ++x) {
      long long idx = (t + x) % (2 * n);
      if (idx < 0) idx += 2 * n;
      if (idx >= n) idx = 2 * n - 1 - idx;
      acc += kernel[static_cast<std::size_t>(x + radius)] * series[static_cast<std::size_t>(idx)];
    }
    out[static_cast<std::size_t>(t)] = acc;
  }
  return out;
}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted, std::size_t n) {
  if (truth >= k_ || predicted >= k_) throw std::out_of_range("class index outside confusion matrix");
  counts_[truth * k_ + predicted] += n;
}

std::size_t ConfusionMatrix::row_total(std::size_t truth) const {
  std::size_t s = 0;
  for (std::size_t p = 0; p < k_; ++p) s += count(truth, p);
  return s;
}

std::size_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0}); }

std::vector<std::vector<double>> ConfusionMatrix::recall_matrix() const {
  std::vector<std::vector<double>> m(k_, std::vector<double>(k_, 0.0));
  for (std::size_t t = 0; t < k_; ++t) {
    const std::size_t row = row_total(t);
    for (std::size_t p = 0; p < k_; ++p) m[t][p] = ratio(count(t, p), row);
  }
  return m;
}

double ConfusionMatrix::accuracy() const {
  std::size_t diag = 0;
  for (std::size_t t = 0; t < k_; ++t) diag += count(t, t);
  return ratio(diag, total());
}

double ConfusionMatrix::macro_recall() const {
  double sum = 0;
  std::size_t rows = 0;
  for (std::size_t t = 0; t < k_; ++t) {
    const std::size_t row = row_total(t);
    if (row == 0) continue;
    sum += ratio(count(t, t), row);
    ++rows;
  }
  return rows == 0 ? 0.0 : sum / static_cast<double>(rows);
}

}  // namespace mpgrade
