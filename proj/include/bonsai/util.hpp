#pragma once

#include <cstddef>
#include <string_view>

namespace bonsai {

inline bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

// Test-file size as reported everywhere: character count excluding whitespace.
inline size_t ws_excluded_size(std::string_view text) {
  size_t n = 0;
  for (char c : text)
    if (!is_ws(c)) ++n;
  return n;
}

}  // namespace bonsai
