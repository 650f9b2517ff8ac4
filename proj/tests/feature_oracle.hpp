#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mpgrade/features.hpp"
#include "mpgrade/rng.hpp"

namespace testutil {

using mpgrade::Dims;
using mpgrade::Field3;
using mpgrade::Rng;

inline Field3 random_field(std::uint64_t seed, Dims d) {
  Rng rng(seed);
  Field3 f(d);
  for (auto& v : f.values) v = std::round(rng.uniform(0, 255));
  return f;
}

// Scalar references, written independently of the library.
inline double sd_oracle(const Field3& f, std::size_t k, std::size_t j, std::size_t i, double phi, double floor_value) {
  const double eps = f.at(k, j, i) - f.at(k, j, f.dims.cols - 1 - i);
  return eps > phi ? eps : floor_value;
}

inline double sw_oracle(const Field3& f, std::size_t k, std::size_t j, std::size_t i, double c) {
  const double w = static_cast<double>(f.dims.cols);
  double sum = 0;
  for (std::size_t x = 0; x < f.dims.cols; ++x)
    sum += (1.0 - c * std::sin(std::numbers::pi * static_cast<double>(x) / w)) * f.at(k, j, x);
  return sum == 0 ? 0.0 : f.at(k, j, i) / sum;
}

inline double gauss_oracle(std::size_t i, std::size_t width, double mu, double sigma) {
  double best = 0;
  for (std::size_t x = 0; x < width; ++x)
    best = std::max(best, std::exp(-std::pow(static_cast<double>(x) - mu, 2) / (2 * sigma * sigma)));
  return std::exp(-std::pow(static_cast<double>(i) - mu, 2) / (2 * sigma * sigma)) / best;
}

}  // namespace testutil
