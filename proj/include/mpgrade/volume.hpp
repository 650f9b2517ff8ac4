#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mpgrade {

inline constexpr std::array<std::string_view, 4> kKnownChannels = {"T2W", "ADC", "DWI", "FE"};

enum class ElementType { U8, F32 };

std::string_view element_type_name(ElementType type);
ElementType parse_element_type(std::string_view name);
std::size_t element_size(ElementType type);

// Spatial extent of one channel: slices (k) x rows (j) x columns (i).
struct Dims {
  std::size_t slices = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t voxels() const { return slices * rows * cols; }
  std::size_t slice_size() const { return rows * cols; }
  bool operator==(const Dims&) const = default;
};

// Multi-channel 3-D intensity volume. Data is row-major [channel, k, j, i];
// i is the left-right axis. The mask, when present, is [k, j, i].
struct MpMriVolume {
  std::vector<std::string> channels;
  Dims dims;
  ElementType dtype = ElementType::U8;
  std::vector<float> data;
  std::optional<std::vector<std::uint8_t>> mask;
  std::optional<std::array<double, 3>> spacing;  // mm, (k, j, i)
  std::optional<int> label;

  MpMriVolume() = default;
  MpMriVolume(std::vector<std::string> channel_names, Dims d, ElementType type = ElementType::U8);

  std::size_t index(std::size_t c, std::size_t k, std::size_t j, std::size_t i) const {
    return ((c * dims.slices + k) * dims.rows + j) * dims.cols + i;
  }
  float& at(std::size_t c, std::size_t k, std::size_t j, std::size_t i) { return data[index(c, k, j, i)]; }
  float at(std::size_t c, std::size_t k, std::size_t j, std::size_t i) const { return data[index(c, k, j, i)]; }

  std::span<float> channel(std::size_t c);
  std::span<const float> channel(std::size_t c) const;
  std::span<float> slice(std::size_t c, std::size_t k);
  std::span<const float> slice(std::size_t c, std::size_t k) const;

  std::optional<std::size_t> find_channel(std::string_view name) const;
  // Throws std::invalid_argument naming the missing channel.
  std::size_t require_channel(std::string_view name) const;

  // Throws std::invalid_argument on any broken invariant.
  void validate() const;

  bool operator==(const MpMriVolume&) const = default;
};

// Serialized form of a volume: a JSON sidecar plus little-endian payloads.
struct EncodedVolume {
  std::string sidecar;
  std::vector<char> data;
  std::vector<char> mask;  // empty when the volume has no mask
};

// `stem` is the file stem the sidecar refers to ("case_0001" -> case_0001.raw).
EncodedVolume encode_volume(const MpMriVolume& vol, std::string_view stem);

struct VolumePaths {
  std::filesystem::path sidecar;
  std::filesystem::path data;
  std::filesystem::path mask;
};
// Accepts "dir/case.json" or "dir/case".
VolumePaths volume_paths(const std::filesystem::path& path);

// Writes <stem>.json, <stem>.raw and, with a mask, <stem>.mask.raw.
// Returns true if any file changed on disk.
bool write_volume(const MpMriVolume& vol, const std::filesystem::path& path);
MpMriVolume read_volume(const std::filesystem::path& path);

}  // namespace mpgrade
