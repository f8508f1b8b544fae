#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace patternmine {

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

/// Lowercase hex SHA-256 of a file's contents. Throws Error(IOError).
std::string sha256_file(const std::filesystem::path& path);

/// Digest over a set of files: hashes "name\0digest\n" for each file in the
/// given order, so renames and reorderings change the result.
std::string sha256_files(std::span<const std::filesystem::path> paths);

}  // namespace patternmine
