#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mpgrade/losses.hpp"
#include "mpgrade/manifest.hpp"
#include "mpgrade/metrics.hpp"
#include "mpgrade/trainer.hpp"

namespace mpgrade {

// Leaves of the decision tree: grades 0-1, 2-3, 4 and 5.
enum class Leaf { G01 = 0, G23 = 1, G4 = 2, G5 = 3 };
inline constexpr std::size_t kLeafCount = 4;
inline constexpr int kStageCount = 3;

std::string_view leaf_name(Leaf leaf);
Leaf leaf_of_grade(int grade);

// Binary label of `grade` for a stage (1: 0-1 vs 2-5, 2: 2-3 vs 4-5, 3: 4 vs 5),
// or nullopt when the stage does not see that grade.
std::optional<int> stage_label(int grade, int stage);

// Keeps the grades the stage sees and rewrites their labels to 0/1.
// Throws when either class of the stage ends up empty.
DatasetManifest relabel_for_stage(const DatasetManifest& manifest, int stage);
std::vector<Sample> relabel_for_stage(std::span<const Sample> samples, int stage);

struct RouteResult {
  Leaf leaf = Leaf::G01;
  double confidence = 1.0;        // product of the chosen-branch probabilities
  std::vector<ProbPair> stages;  // outputs of the stages actually evaluated
};

// Stages are queried lazily, in order, only while the path continues.
RouteResult route(const std::function<ProbPair(int stage)>& stage_probs);

struct CascadeModels {
  std::array<SurrogateClassifier, kStageCount> stages;
};

RouteResult route(const CascadeModels& models, std::span<const double> features);

// rate[t][p]: fraction of true class t predicted as p.
using BinaryRates = std::array<std::array<double, 2>, 2>;

BinaryRates rates_from_recalls(double negative_recall, double positive_recall);
BinaryRates rates_from_confusion(const BinaryConfusion& c);

using LeafMatrix = std::array<std::array<double, kLeafCount>, kLeafCount>;

// Leaf-by-leaf matrix of path products. A leaf that a stage does not see is
// routed by that stage as the stage's negative class (the lower grades).
LeafMatrix compose_recall(const std::array<BinaryRates, kStageCount>& stages);

struct RouteRecord {
  std::string id;
  int grade = 0;
  RouteResult route;
};

struct CascadeResult {
  std::array<BinaryConfusion, kStageCount> stages;
  LeafMatrix composed{};
  ConfusionMatrix empirical{kLeafCount};
  std::vector<RouteRecord> routes;
};

// `samples` carry the original grades 0..5.
CascadeResult cascade_evaluate(const CascadeModels& models, std::span<const Sample> samples);

// Sums a 6-grade confusion matrix into the 4 leaves.
ConfusionMatrix group_to_leaves(const ConfusionMatrix& grades);

LeafMatrix recall_matrix(const ConfusionMatrix& leaves);
double diagonal_mean(const LeafMatrix& m);

}  // namespace mpgrade
