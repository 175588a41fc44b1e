#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace minoseval {

std::string trim(std::string_view s);
std::string ascii_lower(std::string_view s);
bool contains_ci(std::string_view haystack, std::string_view needle);

// Lines as delimited by \n; a trailing \r is stripped from each line.
std::vector<std::string> split_lines(std::string_view s);

// Decodes UTF-8; malformed byte sequences decode to U+FFFD one byte at a time.
std::vector<uint32_t> decode_utf8(std::string_view s);
void append_utf8(std::string& out, uint32_t cp);

bool is_unicode_space(uint32_t cp);
bool is_cjk(uint32_t cp);

// FNV-1a 64-bit. Stable across platforms, used for shuffle seeding only —
// cache digests use SHA-256.
uint64_t fnv1a64(std::string_view s);

}  // namespace minoseval
