#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mpgrade/cascade.hpp"
#include "mpgrade/trainer.hpp"

namespace mpgrade {

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major
};

// Binary PGM (P5, maxval 255).
std::string encode_pgm(const GrayImage& image);

// Min-max scales a row-major field to 0..255; a constant field maps to 0.
GrayImage to_gray(std::span<const double> values, std::size_t width, std::size_t height);

// Line plot of one or more series on a white canvas, shared y-range.
GrayImage plot_series(std::span<const std::vector<double>> series, std::size_t width = 400, std::size_t height = 240);

// Heat map of a square matrix with values in [0, 1], one block per cell.
GrayImage plot_matrix(const std::vector<std::vector<double>>& matrix, std::size_t cell = 32);

// Training log columns plus Gaussian-smoothed train_loss.
std::string format_curve_csv(std::span<const EpochLog> log, double smooth_sigma);

std::string format_matrix_csv(std::span<const std::string> labels, const std::vector<std::vector<double>>& matrix);
std::vector<std::vector<double>> parse_matrix_csv(std::string_view csv);
std::string format_count_matrix_csv(std::span<const std::string> labels, const ConfusionMatrix& matrix);

std::vector<std::vector<double>> to_rows(const LeafMatrix& m);
std::vector<std::string> leaf_labels();

std::string format_metric_table(const MetricBundle& m);
std::string format_metric_csv(const MetricBundle& m);

}  // namespace mpgrade
