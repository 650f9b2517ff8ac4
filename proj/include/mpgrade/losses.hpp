#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace mpgrade {

inline constexpr double kProbClamp = 1e-7;

// Softmax output of a binary classifier.
struct ProbPair {
  double p0 = 0.5;
  double p1 = 0.5;
};

// Loss value and its partial derivatives with respect to p0 and p1, treated as
// independent inputs. Derivatives are evaluated at the clamped probabilities.
struct LossGrad {
  double value = 0;
  double d_p0 = 0;
  double d_p1 = 0;
};

struct RfaHyperparams {
  double m = 0.3;
  double n1 = 1.0;
  double n2 = 3.0;

  void validate() const;
};

enum class LossKind { Rfa, CrossEntropy, Focal, Recall };

std::string_view loss_kind_name(LossKind kind);
LossKind parse_loss_kind(std::string_view name);

struct LossConfig {
  LossKind kind = LossKind::Rfa;
  RfaHyperparams rfa;
  double gamma = 2.0;
  double alpha = 0.25;

  void validate() const;
};

double clamp_prob(double p);

// P_wrong - log(P_correct).
LossGrad base_loss(ProbPair p, int label);

// label 0: A * p1 - (1 - a) * log(p0)
// label 1: -A * log(p1) + (1 - a) * p0
LossGrad rfa_loss(ProbPair p, int label, double adjustment, double accuracy);

LossGrad cross_entropy(ProbPair p, int label);

// -alpha_t (1 - p_t)^gamma log(p_t), alpha_t = alpha for class 1, 1 - alpha for class 0.
LossGrad focal_loss(ProbPair p, int label, double gamma, double alpha);

// K-class cross-entropy; writes dL/dp into `d_probs` and returns the value.
double cross_entropy(std::span<const double> probs, int label, std::span<double> d_probs);

struct RecallLossState {
  std::vector<double> recalls;  // R_c per class, each in [0, 1]
};

struct BatchLoss {
  double value = 0;                         // mean over the batch
  std::vector<std::vector<double>> d_probs;  // per sample, already divided by batch size
};

// -sum_c sum_{n: y_n = c} (1 - R_c) log p_{n, y_n}, averaged over the batch.
BatchLoss recall_ce(std::span<const std::vector<double>> probs, std::span<const int> labels,
                    const RecallLossState& state);

}  // namespace mpgrade
