#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>

#include "mpgrade/manifest.hpp"
#include "mpgrade/volume.hpp"

namespace mpgrade {

struct GradeRange {
  double lo = 0;
  double hi = 0;
};

struct PhantomConfig {
  std::array<std::size_t, 6> counts{24, 24, 85, 56, 33, 22};
  Dims shape{16, 64, 64};
  // In-plane lesion radius (voxels) per grade; grade 0 is unused.
  std::array<GradeRange, 6> radius{{{0, 0}, {2.5, 5.5}, {2.7, 5.7}, {2.9, 5.9}, {3.1, 6.1}, {3.3, 6.3}}};
  // Lesion contrast (intensity units) per grade: centres linear from 20 to 120, +-25.
  std::array<GradeRange, 6> contrast{{{0, 0}, {0, 45}, {20, 70}, {45, 95}, {70, 120}, {95, 145}}};
  double lesion_z_ratio = 0.5;  // axial radius relative to the in-plane radius
  bool asymmetric = true;       // false mirrors every lesion across the midline
  double noise_sigma = 56.0;
  double texture_amplitude = 6.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LesionBox {
  std::size_t z0 = 0, z1 = 0, y0 = 0, y1 = 0, x0 = 0, x1 = 0;  // half-open
};

struct PhantomCase {
  MpMriVolume volume;  // channels T2W, ADC, DWI, f32, gland mask, label = grade
  std::optional<LesionBox> lesion;
};

// Deterministic in (cfg.seed, grade, index).
PhantomCase generate_case(const PhantomConfig& cfg, int grade, std::size_t index);
MpMriVolume generate_volume(const PhantomConfig& cfg, int grade, std::size_t index);

// The same case without lesion and without noise.
MpMriVolume phantom_background(const PhantomConfig& cfg, int grade, std::size_t index);

// Writes <out_dir>/cases/g<grade>_<index>.{json,raw,mask.raw} and returns the
// manifest (paths relative to out_dir, every entry tagged train).
// `changed` (optional) reports whether any file was (re)written.
DatasetManifest generate_dataset(const PhantomConfig& cfg, const std::filesystem::path& out_dir,
                                 std::size_t jobs = 1, bool* changed = nullptr);

}  // namespace mpgrade
