#include "mpgrade/manifest.hpp"

#include <charconv>
#include <set>
#include <stdexcept>

#include "mpgrade/io_util.hpp"

namespace mpgrade {

std::string_view split_name(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::Train;
  if (name == "val") return Split::Val;
  if (name == "test") return Split::Test;
  throw std::invalid_argument("unknown split tag '" + std::string(name) + "'");
}

void DatasetManifest::validate() const {
  std::set<std::string_view> paths;
  for (const auto& e : entries) {
    if (e.label < 0 || e.label > 5)
      throw std::invalid_argument("label " + std::to_string(e.label) + " outside 0..5 for " + e.path);
    if (!paths.insert(e.path).second) throw std::invalid_argument("duplicate manifest path " + e.path);
  }
}

std::vector<ManifestEntry> DatasetManifest::with_split(Split split) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries)
    if (e.split == split) out.push_back(e);
  return out;
}

DatasetManifest parse_manifest(std::string_view csv) {
  DatasetManifest manifest;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!csv.empty()) {
    const auto eol = csv.find('\n');
    std::string_view line = csv.substr(0, eol);
    csv = eol == std::string_view::npos ? std::string_view{} : csv.substr(eol + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "path,label,split")
        throw std::invalid_argument("manifest header must be 'path,label,split'");
      header_seen = true;
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos || line.find(',', c2 + 1) != std::string_view::npos)
      throw std::invalid_argument("malformed manifest row " + std::to_string(line_no));
    ManifestEntry entry;
    entry.path = std::string(line.substr(0, c1));
    const auto label_text = line.substr(c1 + 1, c2 - c1 - 1);
    const auto [ptr, ec] = std::from_chars(label_text.data(), label_text.data() + label_text.size(), entry.label);
    if (entry.path.empty() || ec != std::errc{} || ptr != label_text.data() + label_text.size())
      throw std::invalid_argument("malformed manifest row " + std::to_string(line_no));
    entry.split = parse_split(line.substr(c2 + 1));
    manifest.entries.push_back(std::move(entry));
  }
  if (!header_seen) throw std::invalid_argument("manifest is empty");
  manifest.validate();
  return manifest;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_text(path));
}

std::string format_manifest(const DatasetManifest& manifest) {
  std::string out = "path,label,split\n";
  for (const auto& e : manifest.entries) {
    out += e.path;
    out += ',';
    out += std::to_string(e.label);
    out += ',';
    out += split_name(e.split);
    out += '\n';
  }
  return out;
}

std::filesystem::path resolve_entry(const std::filesystem::path& manifest_path, const ManifestEntry& entry) {
  const std::filesystem::path p(entry.path);
  if (p.is_absolute()) return p;
  return manifest_path.parent_path() / p;
}

}  // namespace mpgrade
