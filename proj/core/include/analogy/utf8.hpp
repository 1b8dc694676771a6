#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace analogy::utf8 {

// Character offsets throughout the corpus model count Unicode code points.

std::size_t length(std::string_view text);

// Byte offset of code point `index`; index == length(text) maps to text.size().
// Returns std::string_view::npos when index is past the end.
std::size_t byte_offset(std::string_view text, std::size_t index);

// Code points [start, end). Caller guarantees start <= end <= length(text).
std::string substr(std::string_view text, std::size_t start, std::size_t end);

}  // namespace analogy::utf8
