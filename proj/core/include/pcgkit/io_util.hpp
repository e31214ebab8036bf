#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace pcgkit {

// Writes to a sibling temporary file and renames it into place, so readers
// never observe a partially written file.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

// Hex-encoded SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace pcgkit
