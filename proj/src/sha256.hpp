#pragma once

#include <string>

namespace nlm {

// Hex digest (FIPS 180-4).
std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::string& path);

}  // namespace nlm
