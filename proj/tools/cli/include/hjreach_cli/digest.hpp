#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace hjreach::cli {

// Hex SHA-256 over the concatenated contents of `files`, in order.
std::string sha256_files(const std::vector<std::filesystem::path>& files);

// Content hash of a value-function dump: manifest plus every field file it
// lists, prefixed with "sha256:".
std::string dump_hash(const std::filesystem::path& dir);

}  // namespace hjreach::cli
