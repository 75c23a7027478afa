#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rw {

/// Hex-encoded SHA-256 of the input bytes.
std::string sha256_hex(std::string_view data);

/// Digest over a field tuple. Fields are length-prefixed before hashing so
/// that ("ab","c") and ("a","bc") cannot collide.
std::string sha256_fields(const std::vector<std::string>& fields);

/// Shortest round-trip decimal form of a double (std::to_chars), used in
/// canonical encodings so fixtures hash identically across platforms.
std::string canonical_double(double value);

}  // namespace rw
