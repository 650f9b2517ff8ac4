#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "mpgrade/io_util.hpp"
#include "mpgrade/phantom.hpp"
#include "mpgrade/volume.hpp"
#include "test_util.hpp"

using namespace mpgrade;

namespace {

PhantomConfig small() {
  PhantomConfig cfg;
  cfg.counts = {2, 1, 2, 1, 1, 2};
  cfg.seed = 77;
  cfg.noise_sigma = 8;
  return cfg;
}

double box_mean(const MpMriVolume& v, std::size_t c, const LesionBox& b) {
  double s = 0, n = 0;
  for (std::size_t k = b.z0; k < b.z1; ++k)
    for (std::size_t j = b.y0; j < b.y1; ++j)
      for (std::size_t i = b.x0; i < b.x1; ++i) {
        s += v.at(c, k, j, i);
        ++n;
      }
  return s / n;
}

}  // namespace

TEST_CASE("volumes are deterministic in seed, grade and index") {
  const auto cfg = small();
  for (int g = 0; g < 6; ++g) {
    const auto a = generate_volume(cfg, g, 3), b = generate_volume(cfg, g, 3);
    CHECK(a.data == b.data);
    CHECK(a.mask == b.mask);
    CHECK(a.label == g);
  }
  CHECK(generate_volume(cfg, 2, 3).data != generate_volume(cfg, 2, 4).data);
  auto other = cfg;
  other.seed = 78;
  CHECK(generate_volume(cfg, 2, 3).data != generate_volume(other, 2, 3).data);
}

TEST_CASE("volume layout and value range") {
  const auto cfg = small();
  const auto v = generate_volume(cfg, 4, 0);
  CHECK(v.channels == std::vector<std::string>{"T2W", "ADC", "DWI"});
  CHECK(v.dims == cfg.shape);
  REQUIRE(v.mask.has_value());
  std::size_t inside = 0;
  for (const auto m : *v.mask) inside += m != 0;
  CHECK(inside > 0);
  CHECK(inside < v.dims.voxels());
  const auto [lo, hi] = std::minmax_element(v.data.begin(), v.data.end());
  CHECK(*lo >= 0);
  CHECK(*hi <= 255);
}

TEST_CASE("grade 0 deviates from its background only by noise") {
  const auto cfg = small();
  std::size_t outliers = 0, total = 0;
  for (std::size_t index = 0; index < 8; ++index) {
    const auto v = generate_volume(cfg, 0, index), bg = phantom_background(cfg, 0, index);
    CHECK(!generate_case(cfg, 0, index).lesion);
    double sum = 0, sum2 = 0;
    std::size_t n = 0;
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < v.dims.voxels(); ++i) {
        const double clean = bg.channel(c)[i];
        if (clean < 3 * cfg.noise_sigma || clean > 255 - 3 * cfg.noise_sigma) continue;
        const double d = v.channel(c)[i] - clean;
        sum += d;
        sum2 += d * d;
        ++n;
        outliers += std::abs(d) > 3 * cfg.noise_sigma;
      }
    total += n;
    const double mean = sum / static_cast<double>(n);
    CHECK(std::abs(mean) < 0.2);
    CHECK(std::sqrt(sum2 / static_cast<double>(n)) == doctest::Approx(cfg.noise_sigma).epsilon(0.05));
  }
  // Two-sided 3-sigma tail of a Gaussian is 0.27%.
  CHECK(static_cast<double>(outliers) / static_cast<double>(total) < 0.005);
}

TEST_CASE("lesion signal follows the grade") {
  const auto cfg = small();
  int higher = 0;
  for (std::size_t index = 0; index < 10; ++index) {
    const auto g2 = generate_case(cfg, 2, index), g5 = generate_case(cfg, 5, index);
    REQUIRE(g2.lesion);
    REQUIRE(g5.lesion);
    const double dwi2 = box_mean(g2.volume, 2, *g2.lesion), dwi5 = box_mean(g5.volume, 2, *g5.lesion);
    higher += dwi5 > dwi2;
    // DWI brighter and T2W/ADC darker inside the lesion than in the clean background.
    const auto bg = phantom_background(cfg, 5, index);
    CHECK(box_mean(g5.volume, 2, *g5.lesion) > box_mean(bg, 2, *g5.lesion));
    CHECK(box_mean(g5.volume, 0, *g5.lesion) < box_mean(bg, 0, *g5.lesion));
    CHECK(box_mean(g5.volume, 1, *g5.lesion) < box_mean(bg, 1, *g5.lesion));
  }
  CHECK(higher == 10);
}

TEST_CASE("dataset counts and determinism") {
  const auto dir = testutil::temp_dir("phantom_ds");
  const auto cfg = small();
  bool changed = false;
  const auto m = generate_dataset(cfg, dir, 2, &changed);
  CHECK(changed);
  std::map<int, std::size_t> per_grade;
  for (const auto& e : m.entries) {
    ++per_grade[e.label];
    CHECK(e.split == Split::Train);
    const auto v = read_volume(resolve_entry(dir / "manifest.csv", e));
    CHECK(v.label == e.label);
  }
  for (int g = 0; g < 6; ++g) CHECK(per_grade[g] == cfg.counts[static_cast<std::size_t>(g)]);

  const auto again = generate_dataset(cfg, dir, 1, &changed);
  CHECK(!changed);
  CHECK(again.entries == m.entries);

  auto none = cfg;
  none.counts = {0, 0, 3, 0, 2, 0};
  const auto sparse = generate_dataset(none, testutil::temp_dir("phantom_sparse"));
  for (const auto& e : sparse.entries) CHECK((e.label == 2 || e.label == 4));
  CHECK(sparse.entries.size() == 5);
}

TEST_CASE("benchmark counts give the reported prevalence") {
  const std::size_t low = 85 + 56, high = 33 + 22;
  CHECK(low == 141);
  CHECK(high == 55);
  CHECK(static_cast<double>(high) / static_cast<double>(low + high) == doctest::Approx(0.281).epsilon(0.002));
}

TEST_CASE("config validation") {
  auto cfg = small();
  cfg.contrast[4] = {200, 210};
  CHECK_THROWS(cfg.validate());
  cfg = small();
  cfg.radius[3] = {0, 1};
  CHECK_THROWS(cfg.validate());
  cfg = small();
  cfg.noise_sigma = -1;
  CHECK_THROWS(cfg.validate());
}
