#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace substan {

// Half-open range of code-point offsets [start, end).
struct CharRange {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool overlaps(const CharRange& o) const { return start < o.end && o.start < end; }
  bool contains(const CharRange& o) const { return start <= o.start && o.end <= end; }
  friend bool operator==(const CharRange&, const CharRange&) = default;
};

// Throws DataError on invalid UTF-8.
std::u32string utf8_decode(std::string_view bytes);
std::string utf8_encode(std::u32string_view text);

// A token-boundary function: returns code-point ranges of tokens in text.
using Tokenizer = std::function<std::vector<CharRange>(std::u32string_view)>;

// Splits on Unicode whitespace only.
std::vector<CharRange> whitespace_tokenize(std::u32string_view text);

// Splits on whitespace and isolates each punctuation character as its own
// token. Alphanumeric runs (including non-ASCII letters) stay together.
std::vector<CharRange> word_punct_tokenize(std::u32string_view text);

bool is_space(char32_t c);
bool is_punct(char32_t c);

// Whitespace-delimited word count.
std::size_t word_count(std::u32string_view text);

// ASCII-only lowercasing; other code points pass through.
std::u32string ascii_lower(std::u32string_view text);
std::string lower_utf8(std::u32string_view text);

}  // namespace substan
