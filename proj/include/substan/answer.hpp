#pragma once

#include <cstddef>

namespace substan {

// Evidence prediction for one claim: an inclusive range of review-token
// indices, or null when the claim is unsupported.
struct EvidenceAnswer {
  enum class Kind { kNull, kSpan };

  Kind kind = Kind::kNull;
  std::size_t start_token = 0;
  std::size_t end_token = 0;  // inclusive
  double score = 0.0;

  static EvidenceAnswer null(double score = 0.0) { return {Kind::kNull, 0, 0, score}; }
  static EvidenceAnswer span(std::size_t start, std::size_t end, double score = 0.0) {
    return {Kind::kSpan, start, end, score};
  }

  bool is_null() const { return kind == Kind::kNull; }
  std::size_t length() const { return is_null() ? 0 : end_token - start_token + 1; }

  // Equality ignores score.
  bool same_answer(const EvidenceAnswer& o) const {
    if (kind != o.kind) return false;
    return is_null() || (start_token == o.start_token && end_token == o.end_token);
  }
};

}  // namespace substan
