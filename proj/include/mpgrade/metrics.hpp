#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mpgrade {

struct BinaryPrediction {
  double score = 0;  // probability of class 1
  int predicted = 0;
  int truth = 0;
};

struct BinaryConfusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  double accuracy() const;
  double precision() const;    // 0/0 -> 0
  double recall() const;       // 0/0 -> 0
  double specificity() const;  // recall of class 0, 0/0 -> 0
  bool operator==(const BinaryConfusion&) const = default;
};

BinaryConfusion confusion(std::span<const BinaryPrediction> preds);

// Geometric mean of recall and accuracy.
double ars(double recall, double accuracy);

double f_beta(double precision, double recall, double beta = 2.0);

// Mann-Whitney AUC; ties count one half. Throws if only one class is present.
double auc(std::span<const BinaryPrediction> preds);

// Discrete Gaussian convolution (radius round(4 sigma)) with half-sample
// symmetric padding. sigma == 0 returns the input.
std::vector<double> gaussian_smooth(std::span<const double> series, double sigma);

// K x K count matrix, rows = true class, columns = predicted class.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes) : k_(classes), counts_(classes * classes, 0) {}

  void add(std::size_t truth, std::size_t predicted, std::size_t n = 1);
  std::size_t classes() const { return k_; }
  std::size_t count(std::size_t truth, std::size_t predicted) const { return counts_[truth * k_ + predicted]; }
  std::size_t row_total(std::size_t truth) const;
  std::size_t total() const;
  // Row-normalised rates; empty rows are all zero.
  std::vector<std::vector<double>> recall_matrix() const;
  double accuracy() const;
  double macro_recall() const;  // mean over non-empty rows

 private:
  std::size_t k_;
  std::vector<std::size_t> counts_;
};

}  // namespace mpgrade
