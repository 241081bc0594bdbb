#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace abom {

/// Whole-file read; throws Error(Io) naming the path.
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

/// Writes through a uniquely named temporary in the same directory and
/// renames it over `path`, keeping the permissions of any existing file.
void replace_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace abom
