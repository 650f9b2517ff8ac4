#include "mpgrade/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "mpgrade/io_util.hpp"

namespace mpgrade {

std::string encode_pgm(const GrayImage& image) {
  if (image.pixels.size() != image.width * image.height) throw std::invalid_argument("image size mismatch");
  std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  out.append(image.pixels.begin(), image.pixels.end());
  return out;
}

GrayImage to_gray(std::span<const double> values, std::size_t width, std::size_t height) {
  if (values.size() != width * height) throw std::invalid_argument("to_gray: size mismatch");
  GrayImage img{width, height, std::vector<std::uint8_t>(values.size(), 0)};
  if (values.empty()) return img;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  if (range <= 0) return img;
  for (std::size_t i = 0; i < values.size(); ++i)
    img.pixels[i] = static_cast<std::uint8_t>(std::lround((values[i] - *lo) / range * 255.0));
  return img;
}

GrayImage plot_series(std::span<const std::vector<double>> series, std::size_t width, std::size_t height) {
  GrayImage img{width, height, std::vector<std::uint8_t>(width * height, 255)};
  double lo = INFINITY, hi = -INFINITY;
  std::size_t longest = 0;
  for (const auto& s : series) {
    for (const double v : s)
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    longest = std::max(longest, s.size());
  }
  if (longest == 0 || !std::isfinite(lo)) return img;
  if (hi <= lo) hi = lo + 1;
  const std::size_t margin = 4;
  const double plot_w = static_cast<double>(width - 2 * margin - 1);
  const double plot_h = static_cast<double>(height - 2 * margin - 1);
  auto put = [&](long x, long y, std::uint8_t shade) {
    if (x >= 0 && y >= 0 && static_cast<std::size_t>(x) < width && static_cast<std::size_t>(y) < height)
      img.pixels[static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x)] = shade;
  };
  for (std::size_t x = margin; x < width - margin; ++x) put(static_cast<long>(x), static_cast<long>(height - margin), 160);
  for (std::size_t y = margin; y <= height - margin; ++y) put(static_cast<long>(margin) - 1, static_cast<long>(y), 160);
  std::uint8_t shade = 0;
  for (const auto& s : series) {
    long px = -1, py = -1;
    for (std::size_t t = 0; t < s.size(); ++t) {
      const double fx = longest > 1 ? static_cast<double>(t) / static_cast<double>(longest - 1) : 0.0;
      const long x = static_cast<long>(margin) + std::lround(fx * plot_w);
      const long y = static_cast<long>(margin) + std::lround((1.0 - (s[t] - lo) / (hi - lo)) * plot_h);
      if (px >= 0) {
        const long steps = std::max(std::abs(x - px), std::abs(y - py));
        for (long i = 0; i <= steps; ++i) {
          const double f = steps == 0 ? 0.0 : static_cast<double>(i) / static_cast<double>(steps);
          put(px + std::lround(f * static_cast<double>(x - px)), py + std::lround(f * static_cast<double>(y - py)),
              shade);
        }
      }
      px = x;
      py = y;
    }
    shade = static_cast<std::uint8_t>(std::min(200, shade + 100));
  }
  return img;
}

GrayImage plot_matrix(const std::vector<std::vector<double>>& matrix, std::size_t cell) {
  const std::size_t n = matrix.size();
  GrayImage img{n * cell, n * cell, std::vector<std::uint8_t>(n * cell * n * cell, 255)};
  for (std::size_t r = 0; r < n; ++r) {
    if (matrix[r].size() != n) throw std::invalid_argument("plot_matrix expects a square matrix");
    for (std::size_t c = 0; c < n; ++c) {
      const auto shade = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - std::clamp(matrix[r][c], 0.0, 1.0))));
      for (std::size_t y = r * cell; y < (r + 1) * cell; ++y)
        for (std::size_t x = c * cell; x < (c + 1) * cell; ++x) img.pixels[y * img.width + x] = shade;
    }
  }
  return img;
}

std::string format_curve_csv(std::span<const EpochLog> log, double smooth_sigma) {
  std::vector<double> loss;
  for (const auto& row : log) loss.push_back(row.train_loss);
  const auto smoothed = gaussian_smooth(loss, smooth_sigma);
  std::string out = "epoch,train_loss,train_loss_smoothed,val_acc,val_recall,A,lr\n";
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& r = log[i];
    out += std::to_string(r.epoch) + ',' + format_number(r.train_loss) + ',' + format_number(smoothed[i]) + ',' +
           format_number(r.val_acc) + ',' + format_number(r.val_recall) + ',' + format_number(r.adjustment) + ',' +
           format_number(r.lr) + '\n';
  }
  return out;
}

std::string format_matrix_csv(std::span<const std::string> labels, const std::vector<std::vector<double>>& matrix) {
  if (matrix.size() != labels.size()) throw std::invalid_argument("matrix/label size mismatch");
  std::string out = "truth\\predicted";
  for (const auto& l : labels) out += "," + l;
  out += '\n';
  for (std::size_t r = 0; r < matrix.size(); ++r) {
    out += labels[r];
    for (const double v : matrix[r]) out += "," + format_number(v);
    out += '\n';
  }
  return out;
}

std::vector<std::vector<double>> parse_matrix_csv(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::getline(row, field, ',');
    std::vector<double> values;
    while (std::getline(row, field, ',')) values.push_back(std::stod(field));
    rows.push_back(std::move(values));
  }
  for (const auto& r : rows)
    if (r.size() != rows.size()) throw std::runtime_error("matrix CSV is not square");
  return rows;
}

std::string format_count_matrix_csv(std::span<const std::string> labels, const ConfusionMatrix& matrix) {
  std::vector<std::vector<double>> rows(matrix.classes(), std::vector<double>(matrix.classes()));
  for (std::size_t r = 0; r < matrix.classes(); ++r)
    for (std::size_t c = 0; c < matrix.classes(); ++c) rows[r][c] = static_cast<double>(matrix.count(r, c));
  return format_matrix_csv(labels, rows);
}

std::vector<std::vector<double>> to_rows(const LeafMatrix& m) {
  std::vector<std::vector<double>> out;
  for (const auto& row : m) out.emplace_back(row.begin(), row.end());
  return out;
}

std::vector<std::string> leaf_labels() {
  std::vector<std::string> out;
  for (std::size_t l = 0; l < kLeafCount; ++l) out.emplace_back(leaf_name(static_cast<Leaf>(l)));
  return out;
}

std::string format_metric_table(const MetricBundle& m) {
  char auc_text[32] = "n/a";
  if (m.auc) std::snprintf(auc_text, sizeof auc_text, "%.3f", *m.auc);
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "accuracy   %.3f\nprecision  %.3f\nrecall     %.3f\nARS        %.3f\nF2         %.3f\nAUC        %s\n",
                m.accuracy, m.precision, m.recall, m.ars, m.f2, auc_text);
  std::string out = buf;
  if (!m.multiclass) {
    out += "confusion  tp=" + std::to_string(m.binary.tp) + " fp=" + std::to_string(m.binary.fp) +
           " fn=" + std::to_string(m.binary.fn) + " tn=" + std::to_string(m.binary.tn) + "\n";
  }
  return out;
}

std::string format_metric_csv(const MetricBundle& m) {
  std::string out = "accuracy,precision,recall,ars,f2,auc,tp,fp,fn,tn\n";
  out += format_number(m.accuracy) + ',' + format_number(m.precision) + ',' + format_number(m.recall) + ',' +
         format_number(m.ars) + ',' + format_number(m.f2) + ',' + (m.auc ? format_number(*m.auc) : "") + ',' +
         std::to_string(m.binary.tp) + ',' + std::to_string(m.binary.fp) + ',' + std::to_string(m.binary.fn) + ',' +
         std::to_string(m.binary.tn) + '\n';
  return out;
}

}  // namespace mpgrade
