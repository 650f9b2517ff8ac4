#include "mpgrade/volume.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "mpgrade/io_util.hpp"

namespace mpgrade {
namespace {

using nlohmann::json;

void append_f32_le(std::vector<char>& out, float v) {
  auto bits = std::bit_cast<std::uint32_t>(v);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
  char bytes[4];
  std::memcpy(bytes, &bits, 4);
  out.insert(out.end(), bytes, bytes + 4);
}

float read_f32_le(const char* p) {
  std::uint32_t bits;
  std::memcpy(&bits, p, 4);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
  return std::bit_cast<float>(bits);
}

bool is_known_channel(std::string_view name) {
  return std::find(kKnownChannels.begin(), kKnownChannels.end(), name) != kKnownChannels.end();
}

}  // namespace

std::string_view element_type_name(ElementType type) {
  return type == ElementType::U8 ? "u8" : "f32";
}

ElementType parse_element_type(std::string_view name) {
  if (name == "u8") return ElementType::U8;
  if (name == "f32") return ElementType::F32;
  throw std::invalid_argument("unknown dtype '" + std::string(name) + "'");
}

std::size_t element_size(ElementType type) { return type == ElementType::U8 ? 1 : 4; }

MpMriVolume::MpMriVolume(std::vector<std::string> channel_names, Dims d, ElementType type)
    : channels(std::move(channel_names)), dims(d), dtype(type),
      data(channels.size() * d.voxels(), 0.0f) {}

std::span<float> MpMriVolume::channel(std::size_t c) {
  return std::span<float>(data).subspan(c * dims.voxels(), dims.voxels());
}
std::span<const float> MpMriVolume::channel(std::size_t c) const {
  return std::span<const float>(data).subspan(c * dims.voxels(), dims.voxels());
}
std::span<float> MpMriVolume::slice(std::size_t c, std::size_t k) {
  return channel(c).subspan(k * dims.slice_size(), dims.slice_size());
}
std::span<const float> MpMriVolume::slice(std::size_t c, std::size_t k) const {
  return channel(c).subspan(k * dims.slice_size(), dims.slice_size());
}

std::optional<std::size_t> MpMriVolume::find_channel(std::string_view name) const {
  const auto it = std::find(channels.begin(), channels.end(), name);
  if (it == channels.end()) return std::nullopt;
  return static_cast<std::size_t>(it - channels.begin());
}

std::size_t MpMriVolume::require_channel(std::string_view name) const {
  if (auto c = find_channel(name)) return *c;
  throw std::invalid_argument("missing channel " + std::string(name));
}

void MpMriVolume::validate() const {
  std::set<std::string_view> seen;
  for (const auto& name : channels) {
    if (!is_known_channel(name)) throw std::invalid_argument("unknown channel name '" + name + "'");
    if (!seen.insert(name).second) throw std::invalid_argument("duplicate channel name '" + name + "'");
  }
  if (data.size() != channels.size() * dims.voxels())
    throw std::invalid_argument("data size does not match shape");
  if (mask && mask->size() != dims.voxels())
    throw std::invalid_argument("mask shape differs from spatial shape");
  if (label && (*label < 0 || *label > 5))
    throw std::invalid_argument("label " + std::to_string(*label) + " outside 0..5");
  if (dtype == ElementType::U8) {
    for (const float v : data) {
      if (!(v >= 0.0f && v <= 255.0f) || v != std::floor(v))
        throw std::invalid_argument("u8 volume holds a non-byte value");
    }
  } else {
    for (const float v : data)
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite voxel value");
  }
}

EncodedVolume encode_volume(const MpMriVolume& vol, std::string_view stem) {
  vol.validate();
  EncodedVolume out;
  json side;
  side["shape"] = {vol.channels.size(), vol.dims.slices, vol.dims.rows, vol.dims.cols};
  side["dtype"] = element_type_name(vol.dtype);
  side["channels"] = vol.channels;
  side["data_file"] = std::string(stem) + ".raw";
  side["mask"] = vol.mask.has_value();
  if (vol.mask) side["mask_file"] = std::string(stem) + ".mask.raw";
  if (vol.label) side["label"] = *vol.label;
  if (vol.spacing) side["spacing"] = *vol.spacing;
  out.sidecar = side.dump(2) + "\n";

  if (vol.dtype == ElementType::U8) {
    out.data.resize(vol.data.size());
    std::transform(vol.data.begin(), vol.data.end(), out.data.begin(),
                   [](float v) { return static_cast<char>(static_cast<std::uint8_t>(v)); });
  } else {
    out.data.reserve(vol.data.size() * 4);
    for (const float v : vol.data) append_f32_le(out.data, v);
  }
  if (vol.mask) out.mask.assign(vol.mask->begin(), vol.mask->end());
  return out;
}

VolumePaths volume_paths(const std::filesystem::path& path) {
  auto stem = path;
  if (stem.extension() == ".json") stem.replace_extension();
  VolumePaths p;
  p.sidecar = stem;
  p.sidecar += ".json";
  p.data = stem;
  p.data += ".raw";
  p.mask = stem;
  p.mask += ".mask.raw";
  return p;
}

bool write_volume(const MpMriVolume& vol, const std::filesystem::path& path) {
  const auto paths = volume_paths(path);
  const auto parent = paths.sidecar.parent_path();
  if (!parent.empty() && !std::filesystem::is_directory(parent))
    throw std::runtime_error("directory does not exist: " + parent.string());
  const auto encoded = encode_volume(vol, paths.data.stem().string());
  bool changed = write_if_changed(paths.data, encoded.data);
  if (vol.mask) changed |= write_if_changed(paths.mask, encoded.mask);
  changed |= write_if_changed(paths.sidecar, encoded.sidecar);
  return changed;
}

MpMriVolume read_volume(const std::filesystem::path& path) {
  const auto paths = volume_paths(path);
  if (!std::filesystem::exists(paths.sidecar))
    throw std::runtime_error("missing sidecar " + paths.sidecar.string());
  json side;
  try {
    side = json::parse(read_text(paths.sidecar));
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed sidecar " + paths.sidecar.string() + ": " + e.what());
  }
  try {
    const auto shape = side.at("shape").get<std::vector<std::size_t>>();
    if (shape.size() != 4) throw std::runtime_error("sidecar shape must have 4 entries");
    MpMriVolume vol;
    vol.channels = side.at("channels").get<std::vector<std::string>>();
    if (vol.channels.size() != shape[0])
      throw std::runtime_error("channel list does not match shape[0]");
    for (const auto& name : vol.channels)
      if (!is_known_channel(name)) throw std::invalid_argument("unknown channel name '" + name + "'");
    vol.dims = {shape[1], shape[2], shape[3]};
    vol.dtype = parse_element_type(side.at("dtype").get<std::string>());
    if (side.contains("label")) vol.label = side.at("label").get<int>();
    if (side.contains("spacing")) vol.spacing = side.at("spacing").get<std::array<double, 3>>();

    const auto data_path = paths.sidecar.parent_path() / side.at("data_file").get<std::string>();
    if (!std::filesystem::exists(data_path))
      throw std::runtime_error("missing payload " + data_path.string());
    const auto bytes = read_file(data_path);
    const std::size_t count = shape[0] * vol.dims.voxels();
    if (bytes.size() != count * element_size(vol.dtype))
      throw std::runtime_error("payload size mismatch for " + data_path.string() + ": expected " +
                               std::to_string(count * element_size(vol.dtype)) + " bytes, found " +
                               std::to_string(bytes.size()));
    vol.data.resize(count);
    if (vol.dtype == ElementType::U8) {
      for (std::size_t n = 0; n < count; ++n)
        vol.data[n] = static_cast<float>(static_cast<std::uint8_t>(bytes[n]));
    } else {
      for (std::size_t n = 0; n < count; ++n) vol.data[n] = read_f32_le(bytes.data() + 4 * n);
    }

    if (side.value("mask", false)) {
      const auto mask_path = paths.sidecar.parent_path() / side.at("mask_file").get<std::string>();
      if (!std::filesystem::exists(mask_path))
        throw std::runtime_error("missing mask payload " + mask_path.string());
      const auto mbytes = read_file(mask_path);
      if (mbytes.size() != vol.dims.voxels())
        throw std::runtime_error("mask size mismatch for " + mask_path.string());
      vol.mask.emplace(mbytes.begin(), mbytes.end());
    }
    vol.validate();
    return vol;
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed sidecar " + paths.sidecar.string() + ": " + e.what());
  }
}

}  // namespace mpgrade
