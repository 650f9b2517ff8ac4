#include "mpgrade/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mpgrade {

void PreprocessConfig::validate() const {
  if (target_width == 0 || target_height == 0) throw std::invalid_argument("target dimensions must be > 0");
  if (block < 1) throw std::invalid_argument("block must be >= 1");
  if (k_min < 0 || k_min > 255 || k_max < 0 || k_max > 255)
    throw std::invalid_argument("k_min and k_max must lie in [0, 255]");
}

std::size_t reflect_index(long long idx, std::size_t n) {
  if (n == 1) return 0;
  const long long period = 2 * (static_cast<long long>(n) - 1);
  idx %= period;
  if (idx < 0) idx += period;
  if (idx >= static_cast<long long>(n)) idx = period - idx;
  return static_cast<std::size_t>(idx);
}

MpMriVolume crop_to_gland(const MpMriVolume& vol) {
  if (!vol.mask) throw std::invalid_argument("no gland mask");
  const auto& d = vol.dims;
  std::size_t k0 = d.slices, j0 = d.rows, i0 = d.cols, k1 = 0, j1 = 0, i1 = 0;
  bool any = false;
  for (std::size_t k = 0; k < d.slices; ++k)
    for (std::size_t j = 0; j < d.rows; ++j)
      for (std::size_t i = 0; i < d.cols; ++i) {
        if ((*vol.mask)[(k * d.rows + j) * d.cols + i] == 0) continue;
        any = true;
        k0 = std::min(k0, k), k1 = std::max(k1, k);
        j0 = std::min(j0, j), j1 = std::max(j1, j);
        i0 = std::min(i0, i), i1 = std::max(i1, i);
      }
  if (!any) throw std::invalid_argument("no gland mask");

  const Dims out_dims{k1 - k0 + 1, j1 - j0 + 1, i1 - i0 + 1};
  MpMriVolume out(vol.channels, out_dims, vol.dtype);
  out.label = vol.label;
  out.spacing = vol.spacing;
  std::vector<std::uint8_t> mask(out_dims.voxels());
  for (std::size_t k = 0; k < out_dims.slices; ++k)
    for (std::size_t j = 0; j < out_dims.rows; ++j) {
      for (std::size_t c = 0; c < vol.channels.size(); ++c)
        for (std::size_t i = 0; i < out_dims.cols; ++i) out.at(c, k, j, i) = vol.at(c, k + k0, j + j0, i + i0);
      for (std::size_t i = 0; i < out_dims.cols; ++i)
        mask[(k * out_dims.rows + j) * out_dims.cols + i] =
            (*vol.mask)[((k + k0) * d.rows + j + j0) * d.cols + i + i0];
    }
  out.mask = std::move(mask);
  return out;
}

namespace {

void resize_slice(std::span<const float> src, std::size_t in_rows, std::size_t in_cols, std::span<float> dst,
                  std::size_t out_rows, std::size_t out_cols) {
  const double sy = static_cast<double>(in_rows) / static_cast<double>(out_rows);
  const double sx = static_cast<double>(in_cols) / static_cast<double>(out_cols);
  for (std::size_t y = 0; y < out_rows; ++y) {
    const double fy = std::clamp((static_cast<double>(y) + 0.5) * sy - 0.5, 0.0, static_cast<double>(in_rows - 1));
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, in_rows - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t x = 0; x < out_cols; ++x) {
      const double fx = std::clamp((static_cast<double>(x) + 0.5) * sx - 0.5, 0.0, static_cast<double>(in_cols - 1));
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, in_cols - 1);
      const double wx = fx - static_cast<double>(x0);
      const double top = (1 - wx) * src[y0 * in_cols + x0] + wx * src[y0 * in_cols + x1];
      const double bottom = (1 - wx) * src[y1 * in_cols + x0] + wx * src[y1 * in_cols + x1];
      dst[y * out_cols + x] = static_cast<float>((1 - wy) * top + wy * bottom);
    }
  }
}

}  // namespace

MpMriVolume resize_normalize(const MpMriVolume& vol, const PreprocessConfig& cfg) {
  cfg.validate();
  if (vol.dims.voxels() == 0 || vol.channels.empty()) throw std::invalid_argument("empty volume");
  const Dims in = vol.dims;
  const Dims out_dims{in.slices, cfg.target_height, cfg.target_width};
  MpMriVolume out(vol.channels, out_dims, vol.dtype);
  out.label = vol.label;
  if (vol.spacing) {
    auto s = *vol.spacing;
    s[1] *= static_cast<double>(in.rows) / static_cast<double>(out_dims.rows);
    s[2] *= static_cast<double>(in.cols) / static_cast<double>(out_dims.cols);
    out.spacing = s;
  }

  for (std::size_t c = 0; c < vol.channels.size(); ++c) {
    for (std::size_t k = 0; k < in.slices; ++k)
      resize_slice(vol.slice(c, k), in.rows, in.cols, out.slice(c, k), out_dims.rows, out_dims.cols);
    auto values = out.channel(c);
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it, hi = *hi_it;
    for (auto& v : values) {
      double scaled = hi > lo ? (v - lo) / (hi - lo) * 255.0 : 0.0;
      scaled = std::clamp(scaled, 0.0, 255.0);
      v = static_cast<float>(vol.dtype == ElementType::U8 ? std::round(scaled) : scaled);
    }
  }

  if (vol.mask) {
    std::vector<std::uint8_t> mask(out_dims.voxels());
    for (std::size_t k = 0; k < in.slices; ++k)
      for (std::size_t y = 0; y < out_dims.rows; ++y) {
        const auto sy = std::min(in.rows - 1, static_cast<std::size_t>((y + 0.5) * in.rows / out_dims.rows));
        for (std::size_t x = 0; x < out_dims.cols; ++x) {
          const auto sx = std::min(in.cols - 1, static_cast<std::size_t>((x + 0.5) * in.cols / out_dims.cols));
          mask[(k * out_dims.rows + y) * out_dims.cols + x] = (*vol.mask)[(k * in.rows + sy) * in.cols + sx];
        }
      }
    out.mask = std::move(mask);
  }
  return out;
}

MpMriVolume flip_signal(const MpMriVolume& vol, std::span<const std::string> channels) {
  MpMriVolume out = vol;
  for (const auto& name : channels) {
    const std::size_t c = vol.require_channel(name);
    for (std::size_t k = 0; k < vol.dims.slices; ++k) {
      auto s = out.slice(c, k);
      if (s.empty()) continue;
      const float peak = *std::max_element(s.begin(), s.end());
      for (auto& v : s) v = peak - v;
    }
  }
  return out;
}

MpMriVolume suppress_ineffective_adc(const MpMriVolume& vol, const PreprocessConfig& cfg) {
  cfg.validate();
  const std::size_t adc = vol.require_channel("ADC");
  const std::size_t dwi = vol.require_channel("DWI");
  MpMriVolume out = vol;
  const auto& d = vol.dims;
  const std::size_t b = cfg.block;
  const double area = static_cast<double>(b * b);

  for (std::size_t k = 0; k < d.slices; ++k) {
    const auto adc_in = vol.slice(adc, k);
    const auto dwi_in = vol.slice(dwi, k);
    auto adc_out = out.slice(adc, k);
    if (adc_in.empty()) continue;
    const float peak = *std::max_element(adc_in.begin(), adc_in.end());
    for (std::size_t bj = 0; bj < d.rows; bj += b)
      for (std::size_t bi = 0; bi < d.cols; bi += b) {
        double sum_adc = 0, sum_dwi = 0;
        for (std::size_t dj = 0; dj < b; ++dj)
          for (std::size_t di = 0; di < b; ++di) {
            const std::size_t j = reflect_index(static_cast<long long>(bj + dj), d.rows);
            const std::size_t i = reflect_index(static_cast<long long>(bi + di), d.cols);
            sum_adc += adc_in[j * d.cols + i];
            sum_dwi += dwi_in[j * d.cols + i];
          }
        if (!(sum_adc / area > cfg.k_max && sum_dwi / area < cfg.k_min)) continue;
        for (std::size_t j = bj; j < std::min(bj + b, d.rows); ++j)
          for (std::size_t i = bi; i < std::min(bi + b, d.cols); ++i)
            adc_out[j * d.cols + i] = peak - adc_in[j * d.cols + i];
      }
  }
  return out;
}

MpMriVolume preprocess_volume(const MpMriVolume& vol, const PreprocessConfig& cfg) {
  static const std::vector<std::string> kFlipped = {"ADC", "T2W"};
  auto v = crop_to_gland(vol);
  v.dtype = ElementType::U8;  // output is always stored as u8
  v = resize_normalize(v, cfg);
  v = flip_signal(v, kFlipped);
  return suppress_ineffective_adc(v, cfg);
}

}  // namespace mpgrade
