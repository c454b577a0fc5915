#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace gapfill {

/// SHA-256 digest as a lowercase hex string.
std::string sha256_hex(std::span<const std::uint8_t> data);
std::string sha256_hex(const std::string& data);
std::string sha256_file_hex(const std::string& path);

} // namespace gapfill
