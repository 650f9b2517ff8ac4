#include "mpgrade/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mpgrade {

void FeedbackConfig::validate() const {
  if (period < 1) throw std::invalid_argument("feedback period must be >= 1");
  if (!(r_floor > 0) || r_floor > 1) throw std::invalid_argument("r_floor must lie in (0, 1]");
  if (!(a_ceiling < 1) || a_ceiling < 0) throw std::invalid_argument("a_ceiling must lie in [0, 1)");
}

FeedbackState FeedbackState::initial(const FeedbackConfig& cfg) {
  cfg.validate();
  FeedbackState s;
  s.period = cfg.period;
  s.r_floor = cfg.r_floor;
  s.a_ceiling = cfg.a_ceiling;
  return s;
}

FeedbackState record_epoch(FeedbackState state, double accuracy, double recall) {
  if (accuracy < 0 || accuracy > 1 || recall < 0 || recall > 1)
    throw std::invalid_argument("feedback metrics must lie in [0, 1]");
  state.epoch_buffer.emplace_back(accuracy, recall);
  if (state.epoch_buffer.size() >= state.period) {
    double sa = 0, sr = 0;
    for (const auto& [a, r] : state.epoch_buffer) {
      sa += a;
      sr += r;
    }
    const auto n = static_cast<double>(state.epoch_buffer.size());
    state.a = sa / n;
    state.r = sr / n;
    state.epoch_buffer.clear();
  }
  return state;
}

double clamped_accuracy(const FeedbackState& state) { return std::min(state.a, state.a_ceiling); }

double adjustment_factor(const FeedbackState& state, const RfaHyperparams& hp) {
  const double a = clamped_accuracy(state);
  const double r = std::max(state.r, state.r_floor);
  return hp.m * (1.0 - std::pow(a, hp.n1)) / std::pow(r, hp.n2);
}

double accuracy_coefficient(const FeedbackState& state) { return 1.0 - clamped_accuracy(state); }

}  // namespace mpgrade
