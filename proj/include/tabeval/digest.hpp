#pragma once

#include <string>
#include <string_view>

namespace tabeval {

// Lowercase hex SHA-256 of the bytes of s.
std::string sha256_hex(std::string_view s);

}  // namespace tabeval
