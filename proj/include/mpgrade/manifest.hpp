#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mpgrade {

enum class Split { Train, Val, Test };

std::string_view split_name(Split split);
Split parse_split(std::string_view name);

struct ManifestEntry {
  std::string path;  // relative to the manifest's directory unless absolute
  int label = 0;
  Split split = Split::Train;

  bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::uint64_t seed = 0;

  // Unique paths, labels in 0..5.
  void validate() const;
  std::vector<ManifestEntry> with_split(Split split) const;
};

// CSV with header `path,label,split`, UTF-8, LF line endings.
DatasetManifest parse_manifest(std::string_view csv);
DatasetManifest load_manifest(const std::filesystem::path& path);
std::string format_manifest(const DatasetManifest& manifest);

std::filesystem::path resolve_entry(const std::filesystem::path& manifest_path, const ManifestEntry& entry);

}  // namespace mpgrade
