#pragma once

#include <span>
#include <string>
#include <vector>

#include "mpgrade/volume.hpp"

namespace mpgrade {

struct PreprocessConfig {
  std::size_t target_width = 224;
  std::size_t target_height = 224;
  double k_max = 200.0;  // ADC block-mean threshold, 0-255 scale
  double k_min = 50.0;   // DWI block-mean threshold, 0-255 scale
  std::size_t block = 2;

  void validate() const;
};

// Crops every channel and the mask to the bounding cuboid of nonzero mask voxels.
MpMriVolume crop_to_gland(const MpMriVolume& vol);

// Bilinear in-plane resize (pixel-centre convention), then per-channel
// min-max rescale to [0, 255]. A constant channel becomes all zeros.
// u8 volumes are rounded to the nearest integer.
MpMriVolume resize_normalize(const MpMriVolume& vol, const PreprocessConfig& cfg);

// p -> max_k - p per slice k of each named channel.
MpMriVolume flip_signal(const MpMriVolume& vol, std::span<const std::string> channels);

// Block-mean suppression of ineffective ADC regions: for each non-overlapping
// block where mean(ADC) > k_max and mean(DWI) < k_min, ADC := max_k(ADC) - ADC.
// Ragged edge blocks take their mean over a reflection-padded block.
MpMriVolume suppress_ineffective_adc(const MpMriVolume& vol, const PreprocessConfig& cfg);

// crop -> resize_normalize -> flip {ADC, T2W} -> suppress_ineffective_adc, u8 output
MpMriVolume preprocess_volume(const MpMriVolume& vol, const PreprocessConfig& cfg);

// Mirror index into [0, n) without repeating the edge sample (abcd -> dcb|abcd|cba).
std::size_t reflect_index(long long idx, std::size_t n);

}  // namespace mpgrade
