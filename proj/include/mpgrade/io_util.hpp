#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mpgrade {

std::vector<char> read_file(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);

// Writes `bytes` unless the file already holds exactly these bytes.
// Returns true when the file was (re)written.
bool write_if_changed(const std::filesystem::path& path, std::span<const char> bytes);
bool write_if_changed(const std::filesystem::path& path, const std::string& text);
bool write_if_changed(const std::filesystem::path& path, std::string_view text);

// Shortest round-trip-safe decimal form used in every CSV we emit.
std::string format_number(double value);

}  // namespace mpgrade
