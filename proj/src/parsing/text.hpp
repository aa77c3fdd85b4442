#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace comclip::text {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
// Lowercase word tokens: letters, digits, inner apostrophes and hyphens.
// A possessive "'s" is dropped.
std::vector<std::string> word_tokens(std::string_view s);
std::string join(const std::vector<std::string>& words, std::string_view sep = " ");

}  // namespace comclip::text
