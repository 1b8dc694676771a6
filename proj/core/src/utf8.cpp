#include "analogy/utf8.hpp"

namespace analogy {
namespace utf8 {

namespace {

bool is_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

}  // namespace

std::size_t length(std::string_view text) {
  std::size_t n = 0;
  for (unsigned char c : text) {
    if (!is_continuation(c)) ++n;
  }
  return n;
}

std::size_t byte_offset(std::string_view text, std::size_t index) {
  std::size_t seen = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (is_continuation(static_cast<unsigned char>(text[i]))) continue;
    if (seen == index) return i;
    ++seen;
  }
  return seen == index ? text.size() : std::string_view::npos;
}

std::string substr(std::string_view text, std::size_t start, std::size_t end) {
  const std::size_t b = byte_offset(text, start);
  const std::size_t e = byte_offset(text, end);
  return std::string(text.substr(b, e - b));
}

}  // namespace utf8

}  // namespace analogy
