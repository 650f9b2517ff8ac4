#include "mpgrade/io_util.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace mpgrade {

std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return {bytes.begin(), bytes.end()};
}

bool write_if_changed(const std::filesystem::path& path, std::span<const char> bytes) {
  std::error_code ec;
  if (std::filesystem::exists(path, ec) &&
      std::filesystem::file_size(path, ec) == bytes.size()) {
    const auto existing = read_file(path);
    if (std::equal(existing.begin(), existing.end(), bytes.begin())) return false;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
  return true;
}

bool write_if_changed(const std::filesystem::path& path, const std::string& text) {
  return write_if_changed(path, std::string_view(text));
}

bool write_if_changed(const std::filesystem::path& path, std::string_view text) {
  return write_if_changed(path, std::span<const char>(text.data(), text.size()));
}

std::string format_number(double value) {
  char buf[40];
  for (int precision = 6; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, value);
    if (std::strtod(buf, nullptr) == value) break;
  }
  return buf;
}

}  // namespace mpgrade
