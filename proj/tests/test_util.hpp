#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "mpgrade/rng.hpp"
#include "mpgrade/volume.hpp"

namespace testutil {

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("mpgrade_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline mpgrade::MpMriVolume random_volume(std::uint64_t seed, std::vector<std::string> channels, mpgrade::Dims dims,
                                          mpgrade::ElementType type = mpgrade::ElementType::U8, bool with_mask = false) {
  mpgrade::Rng rng(seed);
  mpgrade::MpMriVolume v(std::move(channels), dims, type);
  for (auto& x : v.data)
    x = type == mpgrade::ElementType::U8 ? static_cast<float>(rng.below(256)) : static_cast<float>(rng.uniform(0, 255));
  if (with_mask) {
    v.mask = std::vector<std::uint8_t>(dims.voxels());
    for (auto& m : *v.mask) m = static_cast<std::uint8_t>(rng.below(2));
  }
  return v;
}

}  // namespace testutil

namespace testutil {

// |analytic - numeric| relative to the larger magnitude, floored at 1e-6.
inline double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / scale;
}

}  // namespace testutil
