#include "mpgrade/model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

#include "mpgrade/rng.hpp"

namespace mpgrade {
namespace {

std::uint64_t next_version() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1);
}

// [start, end) of adaptive-average-pool bin b out of g over n samples.
std::pair<std::size_t, std::size_t> bin_range(std::size_t b, std::size_t g, std::size_t n) {
  return {(b * n) / g, ((b + 1) * n + g - 1) / g};
}

}  // namespace

void ModelConfig::validate() const {
  if (grid.z < 1 || grid.y < 1 || grid.x < 1) throw std::invalid_argument("pool grid dimensions must be >= 1");
  if (hidden_width < 1) throw std::invalid_argument("hidden_width must be >= 1");
  if (num_classes < 2) throw std::invalid_argument("num_classes must be >= 2");
  if (channels.empty()) throw std::invalid_argument("model needs at least one input channel");
}

std::vector<double> pool_volume(const MpMriVolume& vol, const PoolGrid& grid, std::span<const std::string> channels) {
  const auto& d = vol.dims;
  if (d.voxels() == 0) throw std::invalid_argument("cannot pool an empty volume");
  std::vector<double> out;
  out.reserve(channels.size() * grid.cells());
  for (const auto& name : channels) {
    const auto c = vol.find_channel(name);
    if (!c) throw std::invalid_argument("volume lacks model input channel " + name);
    for (std::size_t bz = 0; bz < grid.z; ++bz) {
      const auto [z0, z1] = bin_range(bz, grid.z, d.slices);
      for (std::size_t by = 0; by < grid.y; ++by) {
        const auto [y0, y1] = bin_range(by, grid.y, d.rows);
        for (std::size_t bx = 0; bx < grid.x; ++bx) {
          const auto [x0, x1] = bin_range(bx, grid.x, d.cols);
          double sum = 0;
          for (std::size_t k = z0; k < z1; ++k)
            for (std::size_t j = y0; j < y1; ++j)
              for (std::size_t i = x0; i < x1; ++i) sum += vol.at(*c, k, j, i);
          const auto count = static_cast<double>((z1 - z0) * (y1 - y0) * (x1 - x0));
          out.push_back(sum / count / 255.0);
        }
      }
    }
  }
  return out;
}

SurrogateClassifier::SurrogateClassifier(ModelConfig cfg) : cfg_(std::move(cfg)), version_(next_version()) {
  cfg_.validate();
  const std::size_t d = input_dim(), h = cfg_.hidden_width, k = cfg_.num_classes;
  params_.assign(b2_offset() + k, 0.0);
  Rng rng(cfg_.init_seed);
  const double lim1 = std::sqrt(6.0 / static_cast<double>(d + h));
  for (std::size_t n = 0; n < h * d; ++n) params_[w1_offset() + n] = rng.uniform(-lim1, lim1);
  const double lim2 = std::sqrt(6.0 / static_cast<double>(h + k));
  for (std::size_t n = 0; n < k * h; ++n) params_[w2_offset() + n] = rng.uniform(-lim2, lim2);
}

SurrogateClassifier SurrogateClassifier::zeroed(ModelConfig cfg) {
  SurrogateClassifier m(std::move(cfg));
  std::fill(m.params_.begin(), m.params_.end(), 0.0);
  m.version_ = next_version();
  return m;
}

std::span<double> SurrogateClassifier::mutable_parameters() {
  version_ = next_version();
  return params_;
}

void SurrogateClassifier::set_parameters(std::span<const double> values) {
  if (values.size() != params_.size()) throw std::invalid_argument("parameter count mismatch");
  std::copy(values.begin(), values.end(), params_.begin());
  version_ = next_version();
}

ForwardCache forward_features(const SurrogateClassifier& model, std::span<const double> features) {
  const std::size_t d = model.input_dim(), h = model.hidden_width(), k = model.num_classes();
  if (features.size() != d)
    throw std::invalid_argument("input has " + std::to_string(features.size()) + " features, model expects " +
                                std::to_string(d));
  const auto p = model.parameters();
  ForwardCache cache;
  cache.input.assign(features.begin(), features.end());
  cache.hidden.resize(h);
  for (std::size_t u = 0; u < h; ++u) {
    const double* row = p.data() + model.w1_offset() + u * d;
    double z = p[model.b1_offset() + u];
    for (std::size_t n = 0; n < d; ++n) z += row[n] * features[n];
    cache.hidden[u] = std::tanh(z);
  }
  cache.logits.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    const double* row = p.data() + model.w2_offset() + c * h;
    double z = p[model.b2_offset() + c];
    for (std::size_t u = 0; u < h; ++u) z += row[u] * cache.hidden[u];
    cache.logits[c] = z;
  }
  const double peak = *std::max_element(cache.logits.begin(), cache.logits.end());
  cache.probs.resize(k);
  double total = 0;
  for (std::size_t c = 0; c < k; ++c) total += cache.probs[c] = std::exp(cache.logits[c] - peak);
  for (auto& q : cache.probs) q /= total;
  cache.model = &model;
  cache.version = model.version();
  return cache;
}

ForwardCache forward(const SurrogateClassifier& model, const MpMriVolume& vol) {
  const auto& channels = model.config().channels;
  if (vol.channels.size() != channels.size())
    throw std::invalid_argument("volume has " + std::to_string(vol.channels.size()) + " channels, model expects " +
                                std::to_string(channels.size()));
  return forward_features(model, pool_volume(vol, model.config().grid, channels));
}

void backward(const SurrogateClassifier& model, const ForwardCache& cache, std::span<const double> d_probs,
              std::span<double> grad) {
  if (cache.model != &model || cache.version != model.version())
    throw std::logic_error("stale forward cache: parameters changed since forward()");
  const std::size_t d = model.input_dim(), h = model.hidden_width(), k = model.num_classes();
  if (d_probs.size() != k || grad.size() != model.parameter_count())
    throw std::invalid_argument("gradient buffer shape mismatch");
  const auto p = model.parameters();

  // Softmax Jacobian: dL/dz_c = p_c (g_c - sum_j p_j g_j).
  double dot = 0;
  for (std::size_t c = 0; c < k; ++c) dot += cache.probs[c] * d_probs[c];
  std::vector<double> d_hidden(h, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    const double dz = cache.probs[c] * (d_probs[c] - dot);
    if (dz == 0) continue;
    grad[model.b2_offset() + c] += dz;
    double* gw = grad.data() + model.w2_offset() + c * h;
    const double* w = p.data() + model.w2_offset() + c * h;
    for (std::size_t u = 0; u < h; ++u) {
      gw[u] += dz * cache.hidden[u];
      d_hidden[u] += dz * w[u];
    }
  }
  for (std::size_t u = 0; u < h; ++u) {
    const double da = d_hidden[u] * (1.0 - cache.hidden[u] * cache.hidden[u]);
    if (da == 0) continue;
    grad[model.b1_offset() + u] += da;
    double* gw = grad.data() + model.w1_offset() + u * d;
    for (std::size_t n = 0; n < d; ++n) gw[n] += da * cache.input[n];
  }
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, double lr) {
  if (params.size() != grads.size()) throw std::invalid_argument("parameter and gradient sizes differ");
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
    state.step = 0;
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t n = 0; n < params.size(); ++n) {
    const double g = grads[n];
    state.m[n] = state.beta1 * state.m[n] + (1 - state.beta1) * g;
    state.v[n] = state.beta2 * state.v[n] + (1 - state.beta2) * g * g;
    const double m_hat = state.m[n] / bc1;
    const double v_hat = state.v[n] / bc2;
    params[n] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

}  // namespace mpgrade
