#include "mpgrade/cascade.hpp"

#include <stdexcept>

namespace mpgrade {

std::string_view leaf_name(Leaf leaf) {
  switch (leaf) {
    case Leaf::G01: return "0-1";
    case Leaf::G23: return "2-3";
    case Leaf::G4: return "4";
    case Leaf::G5: return "5";
  }
  return "?";
}

Leaf leaf_of_grade(int grade) {
  if (grade < 0 || grade > 5) throw std::invalid_argument("grade outside 0..5: " + std::to_string(grade));
  if (grade <= 1) return Leaf::G01;
  if (grade <= 3) return Leaf::G23;
  return grade == 4 ? Leaf::G4 : Leaf::G5;
}

std::optional<int> stage_label(int grade, int stage) {
  leaf_of_grade(grade);
  switch (stage) {
    case 1: return grade >= 2 ? 1 : 0;
    case 2:
      if (grade < 2) return std::nullopt;
      return grade >= 4 ? 1 : 0;
    case 3:
      if (grade < 4) return std::nullopt;
      return grade == 5 ? 1 : 0;
    default: throw std::invalid_argument("stage must be 1, 2 or 3, got " + std::to_string(stage));
  }
}

namespace {

void require_both_classes(std::size_t negatives, std::size_t positives, int stage) {
  if (negatives == 0 || positives == 0)
    throw std::invalid_argument("stage " + std::to_string(stage) + " has an empty class (" +
                                std::to_string(negatives) + " negative, " + std::to_string(positives) +
                                " positive)");
}

}  // namespace

DatasetManifest relabel_for_stage(const DatasetManifest& manifest, int stage) {
  DatasetManifest out;
  out.seed = manifest.seed;
  std::size_t counts[2] = {0, 0};
  for (const auto& e : manifest.entries) {
    const auto l = stage_label(e.label, stage);
    if (!l) continue;
    auto copy = e;
    copy.label = *l;
    ++counts[*l];
    out.entries.push_back(std::move(copy));
  }
  require_both_classes(counts[0], counts[1], stage);
  return out;
}

std::vector<Sample> relabel_for_stage(std::span<const Sample> samples, int stage) {
  std::vector<Sample> out;
  std::size_t counts[2] = {0, 0};
  for (const auto& s : samples) {
    const auto l = stage_label(s.label, stage);
    if (!l) continue;
    out.push_back({s.features, *l, s.id});
    ++counts[*l];
  }
  require_both_classes(counts[0], counts[1], stage);
  return out;
}

RouteResult route(const std::function<ProbPair(int stage)>& stage_probs) {
  static constexpr Leaf kNegativeLeaf[kStageCount] = {Leaf::G01, Leaf::G23, Leaf::G4};
  RouteResult r;
  for (int stage = 1; stage <= kStageCount; ++stage) {
    const ProbPair p = stage_probs(stage);
    r.stages.push_back(p);
    const bool positive = p.p1 > p.p0;
    r.confidence *= positive ? p.p1 : p.p0;
    if (!positive) {
      r.leaf = kNegativeLeaf[stage - 1];
      return r;
    }
  }
  r.leaf = Leaf::G5;
  return r;
}

RouteResult route(const CascadeModels& models, std::span<const double> features) {
  return route([&](int stage) {
    const auto c = forward_features(models.stages[static_cast<std::size_t>(stage - 1)], features);
    return ProbPair{c.probs[0], c.probs[1]};
  });
}

BinaryRates rates_from_recalls(double negative_recall, double positive_recall) {
  for (const double r : {negative_recall, positive_recall})
    if (!(r >= 0 && r <= 1)) throw std::invalid_argument("recall outside [0, 1]");
  return {{{negative_recall, 1 - negative_recall}, {1 - positive_recall, positive_recall}}};
}

BinaryRates rates_from_confusion(const BinaryConfusion& c) { return rates_from_recalls(c.specificity(), c.recall()); }

LeafMatrix compose_recall(const std::array<BinaryRates, kStageCount>& t) {
  for (const auto& stage : t)
    for (const auto& row : stage)
      for (const double v : row)
        if (!(v >= 0 && v <= 1)) throw std::invalid_argument("stage rate outside [0, 1]");
  LeafMatrix m{};
  for (std::size_t leaf = 0; leaf < kLeafCount; ++leaf) {
    // Class each stage assigns to this leaf; unseen lower leaves count as negative.
    const std::size_t y1 = leaf >= 1 ? 1 : 0;
    const std::size_t y2 = leaf >= 2 ? 1 : 0;
    const std::size_t y3 = leaf >= 3 ? 1 : 0;
    m[leaf][0] = t[0][y1][0];
    m[leaf][1] = t[0][y1][1] * t[1][y2][0];
    m[leaf][2] = t[0][y1][1] * t[1][y2][1] * t[2][y3][0];
    m[leaf][3] = t[0][y1][1] * t[1][y2][1] * t[2][y3][1];
  }
  return m;
}

CascadeResult cascade_evaluate(const CascadeModels& models, std::span<const Sample> samples) {
  if (samples.empty()) throw std::invalid_argument("cascade evaluation on an empty split");
  CascadeResult out;
  std::array<BinaryRates, kStageCount> rates{};
  for (int stage = 1; stage <= kStageCount; ++stage) {
    std::vector<Sample> in_domain;
    for (const auto& s : samples)
      if (const auto l = stage_label(s.label, stage)) in_domain.push_back({s.features, *l, s.id});
    if (in_domain.empty()) throw std::invalid_argument("empty split for stage " + std::to_string(stage));
    const auto idx = static_cast<std::size_t>(stage - 1);
    out.stages[idx] = confusion(predict_binary(models.stages[idx], in_domain));
    rates[idx] = rates_from_confusion(out.stages[idx]);
  }
  out.composed = compose_recall(rates);
  for (const auto& s : samples) {
    auto r = route(models, s.features);
    out.empirical.add(static_cast<std::size_t>(leaf_of_grade(s.label)), static_cast<std::size_t>(r.leaf));
    out.routes.push_back({s.id, s.label, std::move(r)});
  }
  return out;
}

ConfusionMatrix group_to_leaves(const ConfusionMatrix& grades) {
  if (grades.classes() != 6) throw std::invalid_argument("group_to_leaves expects a 6-grade matrix");
  ConfusionMatrix out(kLeafCount);
  for (int t = 0; t < 6; ++t)
    for (int p = 0; p < 6; ++p)
      out.add(static_cast<std::size_t>(leaf_of_grade(t)), static_cast<std::size_t>(leaf_of_grade(p)),
              grades.count(static_cast<std::size_t>(t), static_cast<std::size_t>(p)));
  return out;
}

LeafMatrix recall_matrix(const ConfusionMatrix& leaves) {
  if (leaves.classes() != kLeafCount) throw std::invalid_argument("recall_matrix expects a 4-leaf matrix");
  const auto rm = leaves.recall_matrix();
  LeafMatrix out{};
  for (std::size_t i = 0; i < kLeafCount; ++i)
    for (std::size_t j = 0; j < kLeafCount; ++j) out[i][j] = rm[i][j];
  return out;
}

double diagonal_mean(const LeafMatrix& m) {
  double s = 0;
  for (std::size_t i = 0; i < kLeafCount; ++i) s += m[i][i];
  return s / static_cast<double>(kLeafCount);
}

}  // namespace mpgrade
