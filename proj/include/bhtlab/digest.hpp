#pragma once

#include <cstdint>
#include <string>

namespace bhtlab {

/// SHA-256 of a byte string, lowercase hex.
std::string sha256_hex(const std::string& data);

/// SHA-256 of a file's contents; throws on read failure.
std::string sha256_file(const std::string& path);

}  // namespace bhtlab
