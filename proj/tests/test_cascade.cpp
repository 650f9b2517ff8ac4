#include <doctest.h>

#include <cmath>

#include "cascade_oracle.hpp"
#include "mpgrade/cascade.hpp"
#include "mpgrade/rng.hpp"

using namespace mpgrade;

namespace {

std::array<BinaryRates, kStageCount> random_rates(Rng& rng) {
  std::array<BinaryRates, kStageCount> r;
  for (auto& s : r) s = rates_from_recalls(rng.uniform(), rng.uniform());
  return r;
}

std::vector<int> labels_of(const DatasetManifest& m) {
  std::vector<int> out;
  for (const auto& e : m.entries) out.push_back(e.label);
  return out;
}

// Stage s fires iff feature s - 1 is 1.
CascadeModels bit_models() {
  ModelConfig cfg;
  cfg.grid = {1, 1, 1};
  cfg.hidden_width = 1;
  cfg.channels = {"s1", "s2", "s3"};
  std::array<SurrogateClassifier, kStageCount> stages{SurrogateClassifier::zeroed(cfg),
                                                       SurrogateClassifier::zeroed(cfg),
                                                       SurrogateClassifier::zeroed(cfg)};
  for (std::size_t s = 0; s < kStageCount; ++s) {
    std::vector<double> p(stages[s].parameter_count(), 0.0);
    p[stages[s].w1_offset() + s] = 20;
    p[stages[s].b1_offset()] = -10;
    p[stages[s].w2_offset() + 1] = 10;  // W2[1][0]
    stages[s].set_parameters(p);
  }
  return {stages};
}

}  // namespace

TEST_CASE("stage relabelling") {
  DatasetManifest m;
  for (int g = 0; g < 6; ++g) m.entries.push_back({"g" + std::to_string(g), g, Split::Train});
  CHECK(labels_of(relabel_for_stage(m, 1)) == std::vector<int>{0, 0, 1, 1, 1, 1});
  const auto s2 = relabel_for_stage(m, 2);
  CHECK(labels_of(s2) == std::vector<int>{0, 0, 1, 1});
  CHECK(s2.entries[0].path == "g2");
  const auto s3 = relabel_for_stage(m, 3);
  CHECK(labels_of(s3) == std::vector<int>{0, 1});
  CHECK(s3.entries[1].path == "g5");
  CHECK_THROWS(relabel_for_stage(m, 4));

  DatasetManifest no_five;
  for (int g = 0; g < 5; ++g) no_five.entries.push_back({"g" + std::to_string(g), g, Split::Train});
  CHECK_THROWS(relabel_for_stage(no_five, 3));
  CHECK_NOTHROW(relabel_for_stage(no_five, 2));

  std::vector<Sample> samples;
  for (int g = 0; g < 6; ++g) samples.push_back({{double(g)}, g, "s"});
  const auto r = relabel_for_stage(samples, 2);
  REQUIRE(r.size() == 4);
  CHECK(r[2].features[0] == 4);
  CHECK(r[2].label == 1);
}

TEST_CASE("leaf mapping") {
  CHECK(leaf_of_grade(0) == Leaf::G01);
  CHECK(leaf_of_grade(1) == Leaf::G01);
  CHECK(leaf_of_grade(3) == Leaf::G23);
  CHECK(leaf_of_grade(4) == Leaf::G4);
  CHECK(leaf_of_grade(5) == Leaf::G5);
  CHECK(leaf_name(Leaf::G23) == "2-3");
  CHECK(stage_label(1, 2) == std::nullopt);
  CHECK(stage_label(3, 1) == 1);
  CHECK(stage_label(4, 3) == 0);
}

TEST_CASE("routing examples") {
  const auto probs = [](std::vector<double> p1) {
    return [p1](int stage) {
      REQUIRE(static_cast<std::size_t>(stage) <= p1.size());
      const double p = p1[static_cast<std::size_t>(stage - 1)];
      return ProbPair{1 - p, p};
    };
  };
  auto r = route(probs({0.9, 0.8, 0.6}));
  CHECK(r.leaf == Leaf::G5);
  CHECK(r.confidence == doctest::Approx(0.432).epsilon(1e-12));

  r = route(probs({0.3}));
  CHECK(r.leaf == Leaf::G01);
  CHECK(r.confidence == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(r.stages.size() == 1);

  r = route(probs({0.9, 0.2}));
  CHECK(r.leaf == Leaf::G23);
  CHECK(r.confidence == doctest::Approx(0.72).epsilon(1e-12));

  r = route(probs({0.9, 0.8, 0.4}));
  CHECK(r.leaf == Leaf::G4);
  CHECK(r.confidence == doctest::Approx(0.9 * 0.8 * 0.6).epsilon(1e-12));
}

TEST_CASE("route confidence is the exact branch product") {
  Rng rng(3);
  for (int t = 0; t < 500; ++t) {
    const std::array<double, 3> p{rng.uniform(), rng.uniform(), rng.uniform()};
    const auto r = route([&](int s) { return ProbPair{1 - p[s - 1], p[s - 1]}; });
    double expected = 1;
    for (const auto& q : r.stages) expected *= q.p1 > q.p0 ? q.p1 : q.p0;
    CHECK(r.confidence == expected);
    CHECK(r.confidence > 0);
    CHECK(r.confidence <= 1);
  }
}

TEST_CASE("composition examples") {
  const auto m = compose_recall({rates_from_recalls(0.5, 1.0), rates_from_recalls(0.7, 0.8), rates_from_recalls(0.75, 0.4)});
  CHECK(m[2][2] == doctest::Approx(0.6).epsilon(1e-12));
  const auto id = compose_recall({rates_from_recalls(1, 1), rates_from_recalls(1, 1), rates_from_recalls(1, 1)});
  for (std::size_t i = 0; i < kLeafCount; ++i)
    for (std::size_t j = 0; j < kLeafCount; ++j) CHECK(id[i][j] == (i == j ? 1.0 : 0.0));
  CHECK_THROWS(rates_from_recalls(1.2, 0.5));
  BinaryRates bad = rates_from_recalls(0.5, 0.5);
  bad[0][0] = -0.1;
  CHECK_THROWS(compose_recall({bad, bad, bad}));
}

TEST_CASE("composition equals path enumeration") {
  Rng rng(4);
  for (int t = 0; t < 1000; ++t) {
    const auto rates = random_rates(rng);
    const auto m = compose_recall(rates);
    const auto oracle = testutil::enumerate_paths(rates);
    for (std::size_t i = 0; i < kLeafCount; ++i) {
      double row = 0;
      for (std::size_t j = 0; j < kLeafCount; ++j) {
        CHECK(m[i][j] == oracle[i][j]);
        row += m[i][j];
      }
      CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("leaf recalls are monotone in every stage recall") {
  constexpr int n = 10;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double a = i / 9.0, b = j / 9.0, c = k / 9.0;
        const auto base = compose_recall({rates_from_recalls(a, b), rates_from_recalls(b, c), rates_from_recalls(c, a)});
        const auto bump = [](double x) { return std::min(1.0, x + 0.05); };
        const std::array<LeafMatrix, 3> raised{
            compose_recall({rates_from_recalls(bump(a), b), rates_from_recalls(b, c), rates_from_recalls(c, bump(a))}),
            compose_recall({rates_from_recalls(a, bump(b)), rates_from_recalls(bump(b), c), rates_from_recalls(c, a)}),
            compose_recall({rates_from_recalls(a, b), rates_from_recalls(b, bump(c)), rates_from_recalls(bump(c), a)})};
        for (const auto& r : raised)
          for (std::size_t l = 0; l < kLeafCount; ++l) CHECK(r[l][l] >= base[l][l]);
      }
}

TEST_CASE("cascade evaluation on path-independent synthetic samples") {
  const auto models = bit_models();
  // Per stage and class: count of negative and positive outcomes.
  const std::array<std::array<std::array<int, 2>, 2>, 3> counts{{{{{3, 1}, {1, 4}}}, {{{2, 2}, {1, 3}}}, {{{3, 2}, {2, 2}}}}};
  const std::array<int, 4> grade_of_leaf{1, 2, 4, 5};
  std::vector<Sample> samples;
  for (std::size_t leaf = 0; leaf < kLeafCount; ++leaf) {
    const std::array<std::size_t, 3> cls{leaf >= 1 ? 1u : 0u, leaf >= 2 ? 1u : 0u, leaf >= 3 ? 1u : 0u};
    for (int o1 = 0; o1 < 2; ++o1)
      for (int o2 = 0; o2 < 2; ++o2)
        for (int o3 = 0; o3 < 2; ++o3) {
          const int n = counts[0][cls[0]][o1] * counts[1][cls[1]][o2] * counts[2][cls[2]][o3];
          for (int c = 0; c < n; ++c) samples.push_back({{double(o1), double(o2), double(o3)}, grade_of_leaf[leaf], "x"});
        }
  }
  const auto result = cascade_evaluate(models, samples);
  const auto empirical = recall_matrix(result.empirical);
  for (std::size_t i = 0; i < kLeafCount; ++i)
    for (std::size_t j = 0; j < kLeafCount; ++j)
      CHECK(empirical[i][j] == doctest::Approx(result.composed[i][j]).epsilon(1e-12));
  CHECK(result.routes.size() == samples.size());
  CHECK(result.stages[0].total() == samples.size());
}

TEST_CASE("perfect stages give a diagonal empirical matrix") {
  const auto models = bit_models();
  std::vector<Sample> samples;
  for (int g = 0; g < 6; ++g)
    samples.push_back({{g >= 2 ? 1.0 : 0.0, g >= 4 ? 1.0 : 0.0, g == 5 ? 1.0 : 0.0}, g, std::to_string(g)});
  const auto result = cascade_evaluate(models, samples);
  const auto rm = recall_matrix(result.empirical);
  for (std::size_t i = 0; i < kLeafCount; ++i)
    for (std::size_t j = 0; j < kLeafCount; ++j) CHECK(rm[i][j] == (i == j ? 1.0 : 0.0));
  CHECK(diagonal_mean(rm) == 1.0);
  CHECK_THROWS(cascade_evaluate(models, std::vector<Sample>{}));
}

TEST_CASE("empirical leaf recall never exceeds the upstream stage recall") {
  const auto models = bit_models();
  Rng rng(8);
  for (int t = 0; t < 50; ++t) {
    std::vector<Sample> samples;
    for (int g = 0; g < 6; ++g)
      for (int n = 0; n < 10; ++n)
        samples.push_back({{double(rng.below(2)), double(rng.below(2)), double(rng.below(2))}, g, "r"});
    const auto result = cascade_evaluate(models, samples);
    const auto rm = recall_matrix(result.empirical);
    const double r1 = result.stages[0].recall();
    CHECK(rm[0][0] <= result.stages[0].specificity() + 1e-12);
    CHECK(rm[1][1] <= r1 + 1e-12);
    CHECK(rm[2][2] <= r1 + 1e-12);
    CHECK(rm[3][3] <= r1 + 1e-12);
  }
}

TEST_CASE("six-grade grouping") {
  ConfusionMatrix g(6);
  g.add(0, 1, 2);
  g.add(1, 3, 1);
  g.add(3, 2, 4);
  g.add(4, 5, 1);
  g.add(5, 5, 3);
  const auto l = group_to_leaves(g);
  CHECK(l.count(0, 0) == 2);
  CHECK(l.count(0, 1) == 1);
  CHECK(l.count(1, 1) == 4);
  CHECK(l.count(2, 3) == 1);
  CHECK(l.count(3, 3) == 3);
  CHECK_THROWS(group_to_leaves(ConfusionMatrix(4)));
}
