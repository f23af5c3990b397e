#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace bocr::utf8 {

struct DecodedChar {
    char32_t codepoint;
    std::size_t offset; // byte offset of the first code unit
};

// Strict decoder: rejects overlong forms, surrogates and truncated
// sequences with InvalidInput.
std::vector<DecodedChar> decode_with_offsets(std::string_view text);
std::u32string decode(std::string_view text);

void append(std::string &out, char32_t cp);
std::string encode(std::u32string_view text);

// "U+0995" style rendering.
std::string format_codepoint(char32_t cp);

} // namespace bocr::utf8
