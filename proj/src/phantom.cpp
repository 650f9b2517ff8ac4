#include "mpgrade/phantom.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "mpgrade/parallel.hpp"
#include "mpgrade/rng.hpp"

namespace mpgrade {

void PhantomConfig::validate() const {
  if (shape.slices < 4 || shape.rows < 8 || shape.cols < 8)
    throw std::invalid_argument("phantom shape must be at least 4 x 8 x 8");
  for (int g = 1; g <= 5; ++g) {
    const auto& r = radius[static_cast<std::size_t>(g)];
    if (!(r.lo > 0) || r.hi < r.lo) throw std::invalid_argument("phantom radius range invalid for grade " + std::to_string(g));
    const auto& c = contrast[static_cast<std::size_t>(g)];
    if (c.lo < 0 || c.hi < c.lo) throw std::invalid_argument("phantom contrast range invalid for grade " + std::to_string(g));
    if (g > 1) {
      const auto& prev = contrast[static_cast<std::size_t>(g - 1)];
      if (c.lo < prev.lo || c.hi < prev.hi)
        throw std::invalid_argument("phantom contrast must be non-decreasing in grade");
    }
  }
  if (!(lesion_z_ratio > 0)) throw std::invalid_argument("phantom lesion_z_ratio must be positive");
  if (noise_sigma < 0 || texture_amplitude < 0) throw std::invalid_argument("phantom noise and texture must be >= 0");
}

namespace {

constexpr std::array<const char*, 3> kChannels{"T2W", "ADC", "DWI"};
constexpr std::array<double, 3> kGland{150, 160, 70};
constexpr std::array<double, 3> kOutside{90, 110, 40};
// Lesion sign and weight per channel: hypointense in T2W and ADC, hyperintense in DWI.
constexpr std::array<double, 3> kLesionGain{-0.6, -1.0, 1.0};
constexpr int kPlacementAttempts = 40;

struct Ellipsoid {
  double cz, cy, cx, rz, ry, rx;

  double radius2(double z, double y, double x) const {
    const double dz = (z - cz) / rz, dy = (y - cy) / ry, dx = (x - cx) / rx;
    return dz * dz + dy * dy + dx * dx;
  }
};

struct Wave {
  double fz, fy, fx, phase;
};

struct Layout {
  Ellipsoid gland;
  std::array<std::array<Wave, 3>, 3> texture;  // per channel
  std::optional<Ellipsoid> lesion;
  double contrast = 0;
};

bool inside_gland(const Ellipsoid& gland, const Ellipsoid& lesion) {
  const double pts[6][3] = {{lesion.cz + lesion.rz, lesion.cy, lesion.cx}, {lesion.cz - lesion.rz, lesion.cy, lesion.cx},
                            {lesion.cz, lesion.cy + lesion.ry, lesion.cx}, {lesion.cz, lesion.cy - lesion.ry, lesion.cx},
                            {lesion.cz, lesion.cy, lesion.cx + lesion.rx}, {lesion.cz, lesion.cy, lesion.cx - lesion.rx}};
  for (const auto& p : pts)
    if (gland.radius2(p[0], p[1], p[2]) > 1.0) return false;
  return true;
}

Layout make_layout(const PhantomConfig& cfg, int grade, std::size_t index) {
  if (grade < 0 || grade > 5) throw std::invalid_argument("phantom grade outside 0..5: " + std::to_string(grade));
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(grade), index));
  const double z = static_cast<double>(cfg.shape.slices), y = static_cast<double>(cfg.shape.rows),
               x = static_cast<double>(cfg.shape.cols);
  Layout l;
  l.gland = {(z - 1) / 2 + rng.uniform(-0.5, 0.5), (y - 1) / 2 + rng.uniform(-2, 2), (x - 1) / 2 + rng.uniform(-1, 1),
             z * 0.4 * rng.uniform(0.9, 1.1),    y * 0.3 * rng.uniform(0.9, 1.1), x * 0.35 * rng.uniform(0.9, 1.1)};
  for (auto& channel : l.texture)
    for (auto& w : channel)
      w = {rng.uniform(0.05, 0.3), rng.uniform(0.05, 0.4), rng.uniform(0.05, 0.4),
           rng.uniform(0, 2 * std::numbers::pi)};
  if (grade == 0) return l;

  const auto g = static_cast<std::size_t>(grade);
  double r = rng.uniform(cfg.radius[g].lo, cfg.radius[g].hi);
  l.contrast = rng.uniform(cfg.contrast[g].lo, cfg.contrast[g].hi);
  const double side = rng.uniform() < 0.5 ? -1.0 : 1.0;
  for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
    if (attempt > 0 && attempt % 8 == 0) r *= 0.85;
    const Ellipsoid lesion{l.gland.cz + rng.uniform(-0.3, 0.3) * l.gland.rz,
                           l.gland.cy + rng.uniform(-0.4, 0.4) * l.gland.ry,
                           l.gland.cx + side * rng.uniform(0.3, 0.6) * l.gland.rx,
                           std::max(1.0, r * cfg.lesion_z_ratio),
                           r,
                           r};
    if (inside_gland(l.gland, lesion)) {
      l.lesion = lesion;
      return l;
    }
  }
  throw std::runtime_error("phantom: could not place a grade " + std::to_string(grade) + " lesion in case " +
                           std::to_string(index) + " after " + std::to_string(kPlacementAttempts) + " attempts");
}

MpMriVolume empty_volume(const PhantomConfig& cfg, int grade) {
  MpMriVolume v;
  v.channels.assign(kChannels.begin(), kChannels.end());
  v.dims = cfg.shape;
  v.dtype = ElementType::F32;
  v.data.assign(3 * cfg.shape.voxels(), 0.0f);
  v.mask = std::vector<std::uint8_t>(cfg.shape.voxels(), 0);
  v.spacing = std::array<double, 3>{3.0, 0.5, 0.5};
  v.label = grade;
  return v;
}

// Soft-edged lesion weight: 1 in the core, linear fall-off over the outer 20%.
double lesion_weight(const Ellipsoid& e, double z, double y, double x) {
  const double d = std::sqrt(e.radius2(z, y, x));
  return std::clamp((1.0 - d) / 0.2, 0.0, 1.0);
}

MpMriVolume render(const PhantomConfig& cfg, int grade, std::size_t index, bool with_lesion, bool with_noise,
                   std::optional<LesionBox>* box) {
  const Layout l = make_layout(cfg, grade, index);
  MpMriVolume v = empty_volume(cfg, grade);
  Rng noise(derive_seed(derive_seed(cfg.seed, "phantom-noise"), static_cast<std::uint64_t>(grade), index));
  std::vector<Ellipsoid> lesions;
  if (with_lesion && l.lesion) {
    lesions.push_back(*l.lesion);
    if (!cfg.asymmetric) {
      Ellipsoid mirrored = *l.lesion;
      mirrored.cx = static_cast<double>(cfg.shape.cols) - 1 - mirrored.cx;
      lesions.push_back(mirrored);
    }
  }
  const Dims& d = cfg.shape;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t k = 0; k < d.slices; ++k)
      for (std::size_t j = 0; j < d.rows; ++j)
        for (std::size_t i = 0; i < d.cols; ++i) {
          const double z = static_cast<double>(k), y = static_cast<double>(j), x = static_cast<double>(i);
          const double g = l.gland.radius2(z, y, x);
          const double blend = std::clamp((1.2 - g) / 0.4, 0.0, 1.0);  // smooth gland boundary
          double value = kOutside[c] + blend * (kGland[c] - kOutside[c]);
          for (const auto& w : l.texture[c])
            value += cfg.texture_amplitude / 3.0 * std::sin(w.fz * z + w.fy * y + w.fx * x + w.phase);
          for (const auto& e : lesions) value += kLesionGain[c] * l.contrast * lesion_weight(e, z, y, x);
          if (with_noise) value += noise.normal(0.0, cfg.noise_sigma);
          v.data[v.index(c, k, j, i)] = static_cast<float>(std::clamp(value, 0.0, 255.0));
          if (c == 0) (*v.mask)[(k * d.rows + j) * d.cols + i] = g <= 1.0 ? 1 : 0;
        }
  }
  if (box) {
    box->reset();
    if (with_lesion && l.lesion) {
      const auto& e = *l.lesion;
      auto span = [](double centre, double radius, std::size_t n) {
        const auto lo = static_cast<std::size_t>(std::max(0.0, std::ceil(centre - radius)));
        const auto hi = static_cast<std::size_t>(std::clamp(std::floor(centre + radius) + 1, 0.0, static_cast<double>(n)));
        return std::pair{lo, hi};
      };
      const auto [z0, z1] = span(e.cz, e.rz, d.slices);
      const auto [y0, y1] = span(e.cy, e.ry, d.rows);
      const auto [x0, x1] = span(e.cx, e.rx, d.cols);
      *box = LesionBox{z0, z1, y0, y1, x0, x1};
    }
  }
  return v;
}

}  // namespace

PhantomCase generate_case(const PhantomConfig& cfg, int grade, std::size_t index) {
  PhantomCase out;
  out.volume = render(cfg, grade, index, true, true, &out.lesion);
  return out;
}

MpMriVolume generate_volume(const PhantomConfig& cfg, int grade, std::size_t index) {
  return render(cfg, grade, index, true, true, nullptr);
}

MpMriVolume phantom_background(const PhantomConfig& cfg, int grade, std::size_t index) {
  return render(cfg, grade, index, false, false, nullptr);
}

DatasetManifest generate_dataset(const PhantomConfig& cfg, const std::filesystem::path& out_dir, std::size_t jobs,
                                 bool* changed) {
  cfg.validate();
  std::filesystem::create_directories(out_dir / "cases");
  DatasetManifest manifest;
  manifest.seed = cfg.seed;
  std::vector<std::pair<int, std::size_t>> work;
  for (int g = 0; g < 6; ++g)
    for (std::size_t n = 0; n < cfg.counts[static_cast<std::size_t>(g)]; ++n) {
      work.emplace_back(g, n);
      char name[64];
      std::snprintf(name, sizeof name, "cases/g%d_%04zu.json", g, n);
      manifest.entries.push_back({name, g, Split::Train});
    }
  std::atomic<bool> any{false};
  parallel_for(work.size(), jobs, [&](std::size_t w) {
    if (write_volume(generate_volume(cfg, work[w].first, work[w].second), out_dir / manifest.entries[w].path))
      any = true;
  });
  if (changed) *changed = any;
  return manifest;
}

}  // namespace mpgrade
