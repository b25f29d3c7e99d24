#include "substan/spans.hpp"

#include <algorithm>
#include <ostream>

#include "substan/errors.hpp"

namespace substan {

std::pair<std::size_t, std::size_t> TokenAlignment::overlapping(CharRange range) const {
  // Offsets are sorted and disjoint, so both ends are monotone.
  auto first = std::partition_point(offsets.begin(), offsets.end(),
                                    [&](const CharRange& t) { return t.end <= range.start; });
  auto last = std::partition_point(first, offsets.end(),
                                   [&](const CharRange& t) { return t.start < range.end; });
  return {static_cast<std::size_t>(first - offsets.begin()),
          static_cast<std::size_t>(last - offsets.begin())};
}

CharRange TokenAlignment::char_range(std::size_t first, std::size_t last) const {
  return {offsets.at(first).start, offsets.at(last - 1).end};
}

std::vector<std::string> TokenAlignment::token_strings(std::size_t first, std::size_t last) const {
  std::vector<std::string> out;
  out.reserve(last - first);
  for (std::size_t i = first; i < last; ++i) out.push_back(utf8_encode(tokens[i]));
  return out;
}

TokenAlignment align_tokens(std::u32string_view text, const Tokenizer& tokenizer) {
  TokenAlignment a;
  a.offsets = tokenizer(text);
  a.tokens.reserve(a.offsets.size());
  std::size_t prev_end = 0;
  for (std::size_t i = 0; i < a.offsets.size(); ++i) {
    const auto& r = a.offsets[i];
    if (r.start >= r.end || r.end > text.size()) {
      throw DataError("tokenizer emitted out-of-bounds range for token " + std::to_string(i));
    }
    if (r.start < prev_end) {
      throw DataError("tokenizer emitted overlapping range for token " + std::to_string(i));
    }
    prev_end = r.end;
    a.tokens.emplace_back(text.substr(r.start, r.size()));
  }
  return a;
}

std::string_view to_string(BioLabel l) {
  switch (l) {
    case BioLabel::kO: return "O";
    case BioLabel::kBPos: return "B-claim_pos";
    case BioLabel::kIPos: return "I-claim_pos";
    case BioLabel::kBNeg: return "B-claim_neg";
    case BioLabel::kINeg: return "I-claim_neg";
  }
  return "?";
}

BioLabel bio_label_from_string(std::string_view name) {
  for (int i = 0; i < kNumBioLabels; ++i) {
    const auto l = static_cast<BioLabel>(i);
    if (to_string(l) == name) return l;
  }
  throw DataError("unknown BIO label '" + std::string(name) + "'");
}

BioEncoding encode_bio(const std::vector<ArgSpan>& spans, const TokenAlignment& a) {
  BioEncoding enc;
  enc.labels.assign(a.size(), BioLabel::kO);
  for (std::size_t k = 0; k < spans.size(); ++k) {
    const auto& s = spans[k];
    if (!is_claim(s.type)) continue;
    const bool pos = is_positive(s.type);
    auto [first, last] = a.overlapping(s.range());
    // A token straddling two adjacent claims stays with the earlier one.
    while (first < last && enc.labels[first] != BioLabel::kO) ++first;
    if (first == last) {
      enc.unaligned_claims.push_back(k);
      continue;
    }
    enc.labels[first] = pos ? BioLabel::kBPos : BioLabel::kBNeg;
    for (std::size_t t = first + 1; t < last; ++t) {
      if (enc.labels[t] != BioLabel::kO) break;
      enc.labels[t] = pos ? BioLabel::kIPos : BioLabel::kINeg;
    }
  }
  return enc;
}

BioEncoding encode_bio(const AnnotatedReview& r, const TokenAlignment& a) {
  return encode_bio(r.spans, a);
}

std::vector<ArgSpan> decode_bio(const LabelSequence& labels, const TokenAlignment& a) {
  if (labels.size() != a.size()) {
    throw UsageError("label sequence length " + std::to_string(labels.size()) +
                     " does not match token count " + std::to_string(a.size()));
  }
  std::vector<ArgSpan> out;
  int next_pos = 1;
  int next_neg = 1;
  std::size_t t = 0;
  while (t < labels.size()) {
    const BioLabel l = labels[t];
    if (l == BioLabel::kO) {
      ++t;
      continue;
    }
    const bool pos = l == BioLabel::kBPos || l == BioLabel::kIPos;
    const BioLabel inside = pos ? BioLabel::kIPos : BioLabel::kINeg;
    const std::size_t first = t++;
    while (t < labels.size() && labels[t] == inside) ++t;
    ArgSpan s;
    s.type = pos ? SpanType::kClaimPos : SpanType::kClaimNeg;
    const CharRange r = a.char_range(first, t);
    s.start = r.start;
    s.end = r.end;
    s.claim_id = pos ? next_pos++ : next_neg++;
    out.push_back(s);
  }
  return out;
}

std::vector<ArgSpan> snap_to_tokens(const std::vector<ArgSpan>& spans, const TokenAlignment& a) {
  std::vector<ArgSpan> out;
  out.reserve(spans.size());
  for (const auto& s : spans) {
    const auto [first, last] = a.overlapping(s.range());
    if (first == last) continue;
    ArgSpan snapped = s;
    const CharRange r = a.char_range(first, last);
    snapped.start = r.start;
    snapped.end = r.end;
    out.push_back(snapped);
  }
  return out;
}

std::vector<Chunk> make_chunks(std::size_t n_tokens, std::size_t max_len,
                               std::optional<std::size_t> stride) {
  if (max_len == 0) throw UsageError("max_len must be positive");
  if (stride && (*stride == 0 || *stride > max_len)) {
    throw UsageError("stride must satisfy 0 < stride <= max_len");
  }
  const std::size_t step = stride.value_or(max_len);
  std::vector<Chunk> out;
  for (std::size_t begin = 0; begin < n_tokens; begin += step) {
    const std::size_t end = std::min(begin + max_len, n_tokens);
    out.push_back({begin, end, static_cast<int>(out.size())});
    if (end == n_tokens) break;
  }
  return out;
}

void write_label_tsv(std::ostream& out, const TokenAlignment& a, const LabelSequence& labels) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    out << utf8_encode(a.tokens[i]) << '\t' << a.offsets[i].start << '\t' << a.offsets[i].end
        << '\t' << (i < labels.size() ? to_string(labels[i]) : "") << '\n';
  }
}

}  // namespace substan
