#include "mpgrade/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mpgrade {

void RfaHyperparams::validate() const {
  if (!(m > 0) || !(n1 > 0) || !(n2 > 0)) throw std::invalid_argument("RFA hyperparameters m, n1, n2 must be > 0");
}

std::string_view loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::Rfa: return "rfa";
    case LossKind::CrossEntropy: return "ce";
    case LossKind::Focal: return "focal";
    case LossKind::Recall: return "recall";
  }
  return "rfa";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "rfa") return LossKind::Rfa;
  if (name == "ce") return LossKind::CrossEntropy;
  if (name == "focal") return LossKind::Focal;
  if (name == "recall") return LossKind::Recall;
  throw std::invalid_argument("unknown loss kind '" + std::string(name) + "'");
}

void LossConfig::validate() const {
  rfa.validate();
  if (gamma < 0) throw std::invalid_argument("focal gamma must be >= 0");
  if (alpha < 0 || alpha > 1) throw std::invalid_argument("focal alpha must lie in [0, 1]");
}

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

namespace {

void check_label(int label) {
  if (label != 0 && label != 1) throw std::invalid_argument("binary loss expects label 0 or 1");
}

}  // namespace

LossGrad base_loss(ProbPair p, int label) {
  check_label(label);
  const double p0 = clamp_prob(p.p0), p1 = clamp_prob(p.p1);
  if (label == 1) return {p0 - std::log(p1), 1.0, -1.0 / p1};
  return {p1 - std::log(p0), -1.0 / p0, 1.0};
}

LossGrad rfa_loss(ProbPair p, int label, double adjustment, double accuracy) {
  check_label(label);
  const double p0 = clamp_prob(p.p0), p1 = clamp_prob(p.p1);
  const double neg = 1.0 - accuracy;
  if (label == 0) return {adjustment * p1 - neg * std::log(p0), -neg / p0, adjustment};
  return {-adjustment * std::log(p1) + neg * p0, neg, -adjustment / p1};
}

LossGrad cross_entropy(ProbPair p, int label) {
  check_label(label);
  const double p0 = clamp_prob(p.p0), p1 = clamp_prob(p.p1);
  if (label == 1) return {-std::log(p1), 0.0, -1.0 / p1};
  return {-std::log(p0), -1.0 / p0, 0.0};
}

LossGrad focal_loss(ProbPair p, int label, double gamma, double alpha) {
  check_label(label);
  const double pt = clamp_prob(label == 1 ? p.p1 : p.p0);
  const double at = label == 1 ? alpha : 1.0 - alpha;
  const double q = 1.0 - pt;
  const double lg = std::log(pt);
  const double value = -at * std::pow(q, gamma) * lg;
  // d/dpt [q^g log pt] = -g q^(g-1) log pt + q^g / pt
  const double dq = gamma == 0 ? 0.0 : gamma * std::pow(q, gamma - 1.0);
  const double d_pt = -at * (-dq * lg + std::pow(q, gamma) / pt);
  if (label == 1) return {value, 0.0, d_pt};
  return {value, d_pt, 0.0};
}

double cross_entropy(std::span<const double> probs, int label, std::span<double> d_probs) {
  if (label < 0 || static_cast<std::size_t>(label) >= probs.size())
    throw std::invalid_argument("label outside the class range");
  std::fill(d_probs.begin(), d_probs.end(), 0.0);
  const double pt = clamp_prob(probs[static_cast<std::size_t>(label)]);
  d_probs[static_cast<std::size_t>(label)] = -1.0 / pt;
  return -std::log(pt);
}

BatchLoss recall_ce(std::span<const std::vector<double>> probs, std::span<const int> labels,
                    const RecallLossState& state) {
  if (probs.empty()) throw std::invalid_argument("empty batch");
  if (probs.size() != labels.size()) throw std::invalid_argument("probability and label counts differ");
  const double inv_b = 1.0 / static_cast<double>(probs.size());
  BatchLoss out;
  out.d_probs.reserve(probs.size());
  for (std::size_t n = 0; n < probs.size(); ++n) {
    const auto c = static_cast<std::size_t>(labels[n]);
    if (c >= state.recalls.size()) throw std::invalid_argument("label outside recall state");
    const double weight = 1.0 - state.recalls[c];
    std::vector<double> d(probs[n].size());
    const double ce = cross_entropy(probs[n], labels[n], d);
    out.value += weight * ce * inv_b;
    for (auto& g : d) g *= weight * inv_b;
    out.d_probs.push_back(std::move(d));
  }
  return out;
}

}  // namespace mpgrade
