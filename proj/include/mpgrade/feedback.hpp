#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "mpgrade/losses.hpp"

namespace mpgrade {

struct FeedbackConfig {
  std::size_t period = 5;
  double r_floor = 0.05;
  double a_ceiling = 0.999;
  bool masked = false;  // keep (a, r) at their initial values for the whole run

  void validate() const;
};

// Validation feedback (a, r) driving the RFA loss. Updated only at epoch
// boundaries, with the arithmetic mean of the last `period` epochs.
struct FeedbackState {
  double a = 0.5;
  double r = 0.5;
  std::vector<std::pair<double, double>> epoch_buffer;  // (accuracy, recall)
  std::size_t period = 5;
  double r_floor = 0.05;
  double a_ceiling = 0.999;

  static FeedbackState initial(const FeedbackConfig& cfg);
};

FeedbackState record_epoch(FeedbackState state, double accuracy, double recall);

// A = M (1 - a^n1) / r^n2 with a <= a_ceiling and r >= r_floor.
double adjustment_factor(const FeedbackState& state, const RfaHyperparams& hp);

// The (1 - a) coefficient of the RFA loss, using the same clamped a.
double accuracy_coefficient(const FeedbackState& state);
double clamped_accuracy(const FeedbackState& state);

}  // namespace mpgrade
