#include <doctest.h>

#include <cmath>
#include <functional>

#include "mpgrade/losses.hpp"
#include "test_util.hpp"

using namespace mpgrade;

namespace {

using ScalarLoss = std::function<double(double p0, double p1)>;

// Central differences treating p0 and p1 as independent inputs.
std::pair<double, double> numeric_grad(const ScalarLoss& f, ProbPair p, double h = 1e-6) {
  return {(f(p.p0 + h, p.p1) - f(p.p0 - h, p.p1)) / (2 * h), (f(p.p0, p.p1 + h) - f(p.p0, p.p1 - h)) / (2 * h)};
}

void check_grad(const LossGrad& g, const ScalarLoss& f, ProbPair p) {
  const auto [n0, n1] = numeric_grad(f, p);
  CHECK(testutil::relative_error(g.d_p0, n0) < 1e-6);
  CHECK(testutil::relative_error(g.d_p1, n1) < 1e-6);
}

ProbPair random_pair(Rng& rng) {
  const double p1 = rng.uniform(0.01, 0.99);
  return {1 - p1, p1};
}

}  // namespace

TEST_CASE("base loss values") {
  CHECK(base_loss({0, 1}, 1).value == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(base_loss({0.5, 0.5}, 1).value == doctest::Approx(1.1931).epsilon(1e-4));
  CHECK(base_loss({0.5, 0.5}, 1).value == doctest::Approx(0.5 + std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("rfa loss values") {
  CHECK(rfa_loss({0.2, 0.8}, 1, 0.48, 0.8).value == doctest::Approx(-0.48 * std::log(0.8) + 0.2 * 0.2).epsilon(1e-12));
  CHECK(rfa_loss({0.2, 0.8}, 1, 0.48, 0.8).value == doctest::Approx(0.1471).epsilon(1e-3));
  CHECK(rfa_loss({0.9, 0.1}, 0, 0.48, 0.8).value == doctest::Approx(0.48 * 0.1 - 0.2 * std::log(0.9)).epsilon(1e-12));
  CHECK(rfa_loss({0.9, 0.1}, 0, 0.48, 0.8).value == doctest::Approx(0.0691).epsilon(1e-3));
}

TEST_CASE("rfa with A = 1 and a = 0 equals the base loss exactly") {
  Rng rng(1);
  for (int n = 0; n < 200; ++n) {
    const auto p = random_pair(rng);
    for (const int y : {0, 1}) {
      const auto r = rfa_loss(p, y, 1.0, 0.0), b = base_loss(p, y);
      CHECK(r.value == b.value);
      CHECK(r.d_p0 == b.d_p0);
      CHECK(r.d_p1 == b.d_p1);
    }
  }
}

TEST_CASE("cross entropy and focal values") {
  CHECK(cross_entropy(ProbPair{0, 1}, 1).value == doctest::Approx(0).epsilon(1e-6));
  CHECK(cross_entropy(ProbPair{0.5, 0.5}, 1).value == doctest::Approx(std::log(2.0)));
  CHECK(focal_loss({0, 1}, 1, 2, 0.25).value == doctest::Approx(0).epsilon(1e-9));
  CHECK(focal_loss({0.5, 0.5}, 1, 2, 0.5).value == doctest::Approx(0.5 * 0.25 * std::log(2.0)).epsilon(1e-12));
  CHECK(focal_loss({0.5, 0.5}, 1, 2, 0.5).value == doctest::Approx(0.0866).epsilon(1e-3));
  Rng rng(2);
  for (int n = 0; n < 100; ++n) {
    const auto p = random_pair(rng);
    for (const int y : {0, 1})
      CHECK(focal_loss(p, y, 0, 0.5).value == doctest::Approx(0.5 * cross_entropy(p, y).value).epsilon(1e-12));
  }
}

TEST_CASE("binary loss gradients match finite differences") {
  Rng rng(3);
  for (int n = 0; n < 1000; ++n) {
    const auto p = random_pair(rng);
    const int y = static_cast<int>(rng.below(2));
    const double A = rng.uniform(0.01, 5), a = rng.uniform(0, 0.99);
    const double gamma = rng.uniform(0, 4), alpha = rng.uniform(0, 1);
    check_grad(base_loss(p, y), [&](double p0, double p1) { return base_loss({p0, p1}, y).value; }, p);
    check_grad(rfa_loss(p, y, A, a), [&](double p0, double p1) { return rfa_loss({p0, p1}, y, A, a).value; }, p);
    check_grad(cross_entropy(p, y), [&](double p0, double p1) { return cross_entropy(ProbPair{p0, p1}, y).value; }, p);
    check_grad(focal_loss(p, y, gamma, alpha),
               [&](double p0, double p1) { return focal_loss({p0, p1}, y, gamma, alpha).value; }, p);
  }
}

TEST_CASE("rfa decreases in the true-class probability") {
  Rng rng(4);
  for (int n = 0; n < 500; ++n) {
    const auto p = random_pair(rng);
    const double A = rng.uniform(0.01, 5), a = rng.uniform(0, 0.99);
    // Moving mass toward the true class: d/dt L(p0 - t, p1 + t) for y = 1.
    const auto g1 = rfa_loss(p, 1, A, a);
    CHECK(g1.d_p1 - g1.d_p0 < 0);
    const auto g0 = rfa_loss(p, 0, A, a);
    CHECK(g0.d_p0 - g0.d_p1 < 0);
  }
}

TEST_CASE("losses stay finite at the probability extremes") {
  for (const double p1 : {0.0, 1e-12, 0.5, 1.0 - 1e-12, 1.0})
    for (const int y : {0, 1}) {
      const ProbPair p{1 - p1, p1};
      for (const auto& g : {base_loss(p, y), rfa_loss(p, y, 1000, 0.999), cross_entropy(p, y), focal_loss(p, y, 2, 0.25)}) {
        CHECK(std::isfinite(g.value));
        CHECK(std::isfinite(g.d_p0));
        CHECK(std::isfinite(g.d_p1));
      }
    }
}

TEST_CASE("recall-weighted cross entropy") {
  const std::vector<std::vector<double>> probs{{0.7, 0.3}, {0.2, 0.8}, {0.6, 0.4}, {0.1, 0.9}};
  const std::vector<int> labels{0, 1, 1, 0};
  const auto ones = recall_ce(probs, labels, {{1.0, 1.0}});
  CHECK(ones.value == 0.0);
  const auto zeros = recall_ce(probs, labels, {{0.0, 0.0}});
  double ce = 0;
  for (std::size_t n = 0; n < 4; ++n) ce -= std::log(probs[n][static_cast<std::size_t>(labels[n])]);
  CHECK(zeros.value == doctest::Approx(ce / 4));

  const RecallLossState state{{0.25, 0.6}};
  const auto mixed = recall_ce(probs, labels, state);
  double oracle = 0;
  for (std::size_t n = 0; n < 4; ++n) {
    const auto c = static_cast<std::size_t>(labels[n]);
    oracle += (1 - state.recalls[c]) * -std::log(probs[n][c]);
  }
  CHECK(mixed.value == doctest::Approx(oracle / 4).epsilon(1e-12));

  // Gradient of the batch mean with respect to each probability.
  const double h = 1e-6;
  for (std::size_t n = 0; n < 4; ++n)
    for (std::size_t c = 0; c < 2; ++c) {
      auto up = probs, down = probs;
      up[n][c] += h;
      down[n][c] -= h;
      const double numeric = (recall_ce(up, labels, state).value - recall_ce(down, labels, state).value) / (2 * h);
      CHECK(testutil::relative_error(mixed.d_probs[n][c], numeric) < 1e-6);
    }
  CHECK_THROWS(recall_ce(std::vector<std::vector<double>>{}, std::vector<int>{}, state));
}

TEST_CASE("recall loss gradients over random batches") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t b = 1 + rng.below(8), k = 2 + rng.below(5);
    std::vector<std::vector<double>> probs(b, std::vector<double>(k));
    std::vector<int> labels(b);
    RecallLossState state{std::vector<double>(k)};
    for (auto& r : state.recalls) r = rng.uniform();
    for (std::size_t n = 0; n < b; ++n) {
      double s = 0;
      for (auto& p : probs[n]) s += p = rng.uniform(0.05, 1);
      for (auto& p : probs[n]) p /= s;
      labels[n] = static_cast<int>(rng.below(k));
    }
    const auto g = recall_ce(probs, labels, state);
    const std::size_t n = rng.below(b), c = static_cast<std::size_t>(labels[n]);
    auto up = probs, down = probs;
    up[n][c] += 1e-6;
    down[n][c] -= 1e-6;
    const double numeric = (recall_ce(up, labels, state).value - recall_ce(down, labels, state).value) / 2e-6;
    CHECK(testutil::relative_error(g.d_probs[n][c], numeric) < 1e-6);
  }
}

TEST_CASE("loss config parsing and validation") {
  CHECK(parse_loss_kind("rfa") == LossKind::Rfa);
  CHECK(parse_loss_kind("ce") == LossKind::CrossEntropy);
  CHECK(parse_loss_kind("focal") == LossKind::Focal);
  CHECK(parse_loss_kind("recall") == LossKind::Recall);
  CHECK_THROWS(parse_loss_kind("dice"));
  LossConfig cfg;
  cfg.alpha = 2;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.rfa.m = 0;
  CHECK_THROWS(cfg.validate());
}
