#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "substan/text.hpp"

namespace substan {

enum class SpanType { kClaimPos, kClaimNeg, kEvidencePos, kEvidenceNeg };

inline constexpr bool is_claim(SpanType t) {
  return t == SpanType::kClaimPos || t == SpanType::kClaimNeg;
}
inline constexpr bool is_positive(SpanType t) {
  return t == SpanType::kClaimPos || t == SpanType::kEvidencePos;
}
inline constexpr SpanType evidence_type_for(SpanType claim) {
  return is_positive(claim) ? SpanType::kEvidencePos : SpanType::kEvidenceNeg;
}
inline constexpr SpanType claim_type_for(SpanType evidence) {
  return is_positive(evidence) ? SpanType::kClaimPos : SpanType::kClaimNeg;
}

// The wire names: claim_pos, claim_neg, evidence_pos, evidence_neg.
std::string_view to_string(SpanType t);
// Throws DataError on an unknown name.
SpanType span_type_from_string(std::string_view name);

struct Review {
  std::string id;
  std::string venue;
  int year = 0;
  std::u32string text;
  std::optional<int> human_substantiation;
  std::optional<int> human_difficulty;
  // Set only for multi-annotator corpora.
  std::optional<std::string> annotator_id;

  friend bool operator==(const Review&, const Review&) = default;
};

// A typed character span. For claims, claim_id is the claim's own ordinal
// within its polarity; for evidence, it is the ordinal of the supported
// claim of the same polarity.
struct ArgSpan {
  SpanType type = SpanType::kClaimPos;
  std::size_t start = 0;
  std::size_t end = 0;
  int claim_id = 0;

  CharRange range() const { return {start, end}; }
  friend bool operator==(const ArgSpan&, const ArgSpan&) = default;
};

struct AnnotatedReview {
  Review review;
  std::vector<ArgSpan> spans;  // sorted by start

  std::vector<ArgSpan> claims() const;
  std::vector<ArgSpan> evidence() const;
  // Evidence linked to the given claim, if any.
  std::optional<ArgSpan> evidence_for(const ArgSpan& claim) const;

  friend bool operator==(const AnnotatedReview&, const AnnotatedReview&) = default;
};

struct RatingRange {
  int min = 1;
  int max = 3;
};

struct Violation {
  std::optional<std::size_t> span_index;
  std::string rule;
  std::string message;
};

// Empty iff every span and review invariant holds. Rule names:
// empty-id, empty-text, rating-range, bounds, unsorted, claim-overlap,
// evidence-overlap, duplicate-claim-id, dangling-claim-id,
// polarity-mismatch, multiple-evidence.
std::vector<Violation> validate_review(const AnnotatedReview& r, RatingRange ratings = {});
std::string describe(const Violation& v);

struct LoadOptions {
  RatingRange ratings;
};

// One record per non-empty line. Throws DataError naming the line number
// and record id on malformed JSON, invalid spans, or duplicate ids.
std::vector<AnnotatedReview> load_corpus(const std::filesystem::path& path,
                                         const LoadOptions& options = {});
std::vector<AnnotatedReview> read_corpus(std::istream& in, const LoadOptions& options = {});

void save_corpus(const std::filesystem::path& path, const std::vector<AnnotatedReview>& corpus);
void write_corpus(std::ostream& out, const std::vector<AnnotatedReview>& corpus);

nlohmann::json to_json(const AnnotatedReview& r);
// Parses one record without validating cross-span invariants.
AnnotatedReview review_from_json(const nlohmann::json& j);

struct CorpusSplit {
  std::vector<AnnotatedReview> train;
  std::vector<AnnotatedReview> test;
};

// Seeded random partition; |test| = round(test_fraction * |corpus|).
// Both parts keep the input order.
CorpusSplit split_corpus(const std::vector<AnnotatedReview>& corpus, double test_fraction,
                         std::uint64_t seed);

}  // namespace substan
