#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "mpgrade/volume.hpp"

namespace mpgrade {

// Symmetry-prior feature extraction. Each channel is mapped by a symmetric
// difference (SD) and a symmetrically weighted row normalisation (SW), the two
// are blended with a Gaussian column weight (Mix), and the three channel mixes
// are fused into one extra "FE" channel.
struct FeConfig {
  double phi = 30.0;      // SD threshold on the 0-255 scale
  double sd_floor = 0.1;  // SD value where the difference does not exceed phi
  std::optional<double> mu;     // Gaussian centre (column units); default width / 2
  std::optional<double> sigma;  // Gaussian width (column units); default width / 6
  double sine_coeff = 0.55;
  std::array<double, 3> channel_weights{1.0, 2.0, 2.0};  // T2W, ADC, DWI

  void validate() const;
  double mu_for(std::size_t width) const { return mu.value_or(static_cast<double>(width) / 2.0); }
  double sigma_for(std::size_t width) const { return sigma.value_or(static_cast<double>(width) / 6.0); }
};

// Dense 3-D scalar field [k, j, i] in double precision.
struct Field3 {
  Dims dims;
  std::vector<double> values;

  Field3() = default;
  explicit Field3(Dims d) : dims(d), values(d.voxels(), 0.0) {}

  double& at(std::size_t k, std::size_t j, std::size_t i) { return values[(k * dims.rows + j) * dims.cols + i]; }
  double at(std::size_t k, std::size_t j, std::size_t i) const { return values[(k * dims.rows + j) * dims.cols + i]; }
};

Field3 channel_field(const MpMriVolume& vol, std::size_t channel);

// eps = D[i] - D[width-1-i]; out = eps if eps > phi else sd_floor.
Field3 symmetric_difference(const Field3& channel, const FeConfig& cfg);

// w(x) = 1 - sine_coeff * sin(pi x / width), x = 0..width-1.
std::vector<double> row_weight_profile(std::size_t width, const FeConfig& cfg);

// D[i] / sum_x w(x) D[x] per row; rows with zero weighted sum map to 0.
Field3 symmetrically_weighted(const Field3& channel, const FeConfig& cfg);

// Gaussian density over columns, normalised by its row maximum.
std::vector<double> gaussian_row_weight(std::size_t width, const FeConfig& cfg);

// W(i) * SW + (1 - W(i)) * SD.
Field3 mix(const Field3& channel, const FeConfig& cfg);

struct FeatureMap {
  Dims dims;
  std::vector<float> data;
  std::vector<std::string> sources;
  FeConfig config;
};

// Weighted sum of three channel mixes, min-max rescaled to [0, 255].
FeatureMap fuse_channels(const Field3& t2, const Field3& adc, const Field3& dwi, const FeConfig& cfg);

// Appends the fused map as channel "FE". Source channels are left untouched.
MpMriVolume extract_features(const MpMriVolume& vol, const FeConfig& cfg);

}  // namespace mpgrade
