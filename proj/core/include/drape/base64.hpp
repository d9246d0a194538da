#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace drape {

std::string base64Encode(std::span<const std::uint8_t> bytes);
/// Throws drape::Error on characters outside the standard alphabet.
std::vector<std::uint8_t> base64Decode(std::string_view text);

}  // namespace drape
