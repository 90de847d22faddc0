#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tabeval::text {

// Collapses internal whitespace runs to one space and trims both ends.
// Non-breaking spaces (U+00A0) count as whitespace.
std::string normalize_ws(std::string_view s);

std::string to_lower(std::string_view s);

bool iequals(std::string_view a, std::string_view b);

// Lowercased alphanumeric tokens; every other ASCII byte separates tokens.
// Bytes >= 0x80 are kept so non-ASCII words survive as tokens.
std::vector<std::string> word_tokens(std::string_view s);

// Decodes UTF-8 into code points; invalid bytes map to U+FFFD.
std::u32string decode_utf8(std::string_view s);

// Cuts s to at most max_bytes without splitting a multi-byte sequence.
std::string_view truncate_utf8(std::string_view s, std::size_t max_bytes);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Lowercase with all whitespace removed; used for lenient value matching.
std::string squash(std::string_view s);

}  // namespace tabeval::text
