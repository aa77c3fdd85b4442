#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace comclip {

using Sha256Digest = std::array<std::uint8_t, 32>;

Sha256Digest sha256(std::string_view bytes);
std::string sha256_hex(std::string_view bytes);
std::string to_hex(const Sha256Digest& digest);

std::string base64_encode(std::string_view bytes);
// Throws DecodeError on malformed input.
std::string base64_decode(std::string_view text);

}  // namespace comclip
