#include "mpgrade/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mpgrade {

void FeConfig::validate() const {
  if (sigma && !(*sigma > 0)) throw std::invalid_argument("sigma must be > 0");
  if (phi < 0 || phi > 255) throw std::invalid_argument("phi must lie in [0, 255]");
  bool any = false;
  for (const double w : channel_weights) {
    if (w < 0) throw std::invalid_argument("channel weights must be >= 0");
    any |= w > 0;
  }
  if (!any) throw std::invalid_argument("channel weights must not all be zero");
}

Field3 channel_field(const MpMriVolume& vol, std::size_t channel) {
  Field3 f(vol.dims);
  const auto src = vol.channel(channel);
  std::copy(src.begin(), src.end(), f.values.begin());
  return f;
}

Field3 symmetric_difference(const Field3& channel, const FeConfig& cfg) {
  const auto& d = channel.dims;
  if (d.cols < 2) throw std::invalid_argument("symmetric difference needs width >= 2");
  Field3 out(d);
  const std::size_t last = d.cols - 1;
  for (std::size_t k = 0; k < d.slices; ++k)
    for (std::size_t j = 0; j < d.rows; ++j)
      for (std::size_t i = 0; i < d.cols; ++i) {
        const double eps = channel.at(k, j, i) - channel.at(k, j, last - i);
        out.at(k, j, i) = eps > cfg.phi ? eps : cfg.sd_floor;
      }
  return out;
}

std::vector<double> row_weight_profile(std::size_t width, const FeConfig& cfg) {
  if (width < 1) throw std::invalid_argument("row width must be >= 1");
  std::vector<double> w(width);
  for (std::size_t x = 0; x < width; ++x)
    w[x] = 1.0 - cfg.sine_coeff * std::sin(std::numbers::pi * static_cast<double>(x) / static_cast<double>(width));
  return w;
}

Field3 symmetrically_weighted(const Field3& channel, const FeConfig& cfg) {
  const auto& d = channel.dims;
  const auto w = row_weight_profile(d.cols, cfg);
  Field3 out(d);
  for (std::size_t k = 0; k < d.slices; ++k)
    for (std::size_t j = 0; j < d.rows; ++j) {
      double denom = 0;
      for (std::size_t x = 0; x < d.cols; ++x) denom += w[x] * channel.at(k, j, x);
      if (denom == 0) continue;
      for (std::size_t i = 0; i < d.cols; ++i) out.at(k, j, i) = channel.at(k, j, i) / denom;
    }
  return out;
}

std::vector<double> gaussian_row_weight(std::size_t width, const FeConfig& cfg) {
  const double mu = cfg.mu_for(width);
  const double sigma = cfg.sigma_for(width);
  if (!(sigma > 0)) throw std::invalid_argument("sigma must be > 0");
  std::vector<double> p(width);
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * sigma * sigma);
  for (std::size_t x = 0; x < width; ++x) {
    const double z = (static_cast<double>(x) - mu) / sigma;
    p[x] = norm * std::exp(-0.5 * z * z);
  }
  const double peak = *std::max_element(p.begin(), p.end());
  for (auto& v : p) v /= peak;
  return p;
}

Field3 mix(const Field3& channel, const FeConfig& cfg) {
  const auto sd = symmetric_difference(channel, cfg);
  const auto sw = symmetrically_weighted(channel, cfg);
  const auto weight = gaussian_row_weight(channel.dims.cols, cfg);
  Field3 out(channel.dims);
  const std::size_t cols = channel.dims.cols;
  for (std::size_t n = 0; n < out.values.size(); ++n) {
    const double w = weight[n % cols];
    out.values[n] = w * sw.values[n] + (1.0 - w) * sd.values[n];
  }
  return out;
}

FeatureMap fuse_channels(const Field3& t2, const Field3& adc, const Field3& dwi, const FeConfig& cfg) {
  cfg.validate();
  if (!(t2.dims == adc.dims) || !(t2.dims == dwi.dims)) throw std::invalid_argument("feature map shape mismatch");
  const auto& w = cfg.channel_weights;
  std::vector<double> raw(t2.values.size());
  for (std::size_t n = 0; n < raw.size(); ++n)
    raw[n] = w[0] * t2.values[n] + w[1] * adc.values[n] + w[2] * dwi.values[n];

  FeatureMap map{t2.dims, std::vector<float>(raw.size(), 0.0f), {"T2W", "ADC", "DWI"}, cfg};
  if (raw.empty()) return map;
  const auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
  const double lo = *lo_it, hi = *hi_it;
  if (hi > lo) {
    for (std::size_t n = 0; n < raw.size(); ++n)
      map.data[n] = static_cast<float>((raw[n] - lo) / (hi - lo) * 255.0);
  }
  return map;
}

MpMriVolume extract_features(const MpMriVolume& vol, const FeConfig& cfg) {
  cfg.validate();
  if (vol.find_channel("FE")) throw std::invalid_argument("volume already has an FE channel");
  const std::size_t t2 = vol.require_channel("T2W");
  const std::size_t adc = vol.require_channel("ADC");
  const std::size_t dwi = vol.require_channel("DWI");
  const auto fe = fuse_channels(mix(channel_field(vol, t2), cfg), mix(channel_field(vol, adc), cfg),
                                mix(channel_field(vol, dwi), cfg), cfg);

  MpMriVolume out = vol;
  out.channels.push_back("FE");
  out.data.reserve(out.data.size() + fe.data.size());
  for (const float v : fe.data)
    out.data.push_back(vol.dtype == ElementType::U8 ? std::round(v) : v);
  return out;
}

}  // namespace mpgrade
