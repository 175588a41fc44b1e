#pragma once

#include <string>
#include <string_view>

namespace minoseval {

// SHA-256 of the input, as a 64-char lowercase hex string. Backs the
// content-addressed response cache; digests must be identical across runs
// and platforms.
std::string sha256_hex(std::string_view data);

}  // namespace minoseval
