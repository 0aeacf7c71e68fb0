#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace latpinn {

/// Shortest decimal that parses back to the same double ('.' separator,
/// locale independent).
std::string fmt_double(double v);

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);
/// Writes atomically enough for our purposes: truncate + write, throws
/// std::runtime_error on I/O failure.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace latpinn
