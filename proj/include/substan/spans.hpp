#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "substan/corpus.hpp"
#include "substan/text.hpp"

namespace substan {

struct TokenAlignment {
  std::vector<std::u32string> tokens;
  std::vector<CharRange> offsets;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }

  // Indices [first, last) of tokens with any character overlap with range.
  // first == last when nothing overlaps.
  std::pair<std::size_t, std::size_t> overlapping(CharRange range) const;
  // Character range covered by tokens [first, last), last > first.
  CharRange char_range(std::size_t first, std::size_t last) const;
  std::vector<std::string> token_strings(std::size_t first, std::size_t last) const;
};

// Throws DataError when the tokenizer yields out-of-bounds, empty, or
// overlapping ranges.
TokenAlignment align_tokens(std::u32string_view text, const Tokenizer& tokenizer);

// Fixed class ordering; argmax ties resolve to the lowest index.
enum class BioLabel : std::uint8_t { kO = 0, kBPos, kIPos, kBNeg, kINeg };
inline constexpr int kNumBioLabels = 5;

std::string_view to_string(BioLabel l);
BioLabel bio_label_from_string(std::string_view name);

using LabelSequence = std::vector<BioLabel>;

struct BioEncoding {
  LabelSequence labels;
  // Claims (indices into the input claim list) that cover no token.
  std::vector<std::size_t> unaligned_claims;
};

// A token belongs to a claim iff any of its characters overlap the claim.
// Evidence spans are ignored.
BioEncoding encode_bio(const std::vector<ArgSpan>& spans, const TokenAlignment& a);
BioEncoding encode_bio(const AnnotatedReview& r, const TokenAlignment& a);

// Maximal B-then-I runs become claim spans; a stray I- opens a new span.
// claim_ids are assigned 1, 2, ... per polarity in text order.
std::vector<ArgSpan> decode_bio(const LabelSequence& labels, const TokenAlignment& a);

// Each span widened or narrowed to the tokens it overlaps; spans covering
// no token are dropped. This is the token-level view used for scoring.
std::vector<ArgSpan> snap_to_tokens(const std::vector<ArgSpan>& spans, const TokenAlignment& a);

struct Chunk {
  std::size_t begin = 0;  // token index, inclusive
  std::size_t end = 0;    // exclusive
  int window_id = 0;

  std::size_t size() const { return end - begin; }
  friend bool operator==(const Chunk&, const Chunk&) = default;
};

// Without stride: consecutive disjoint chunks of max_len. With stride:
// windows start at 0, stride, 2*stride, ... until the last reaches n_tokens.
std::vector<Chunk> make_chunks(std::size_t n_tokens, std::size_t max_len,
                               std::optional<std::size_t> stride = std::nullopt);

// Debug dump: token, start, end, label per line.
void write_label_tsv(std::ostream& out, const TokenAlignment& a, const LabelSequence& labels);

}  // namespace substan
