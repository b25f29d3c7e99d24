#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "substan/answer.hpp"
#include "substan/corpus.hpp"
#include "substan/spans.hpp"

namespace substan {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Undefined ratios (zero denominators) are reported as 0.
PRF prf_from_counts(std::uint64_t true_positive, std::uint64_t predicted, std::uint64_t gold);

struct SpanCounts {
  std::uint64_t true_positive = 0;
  std::uint64_t predicted = 0;
  std::uint64_t gold = 0;

  bool present() const { return predicted > 0 || gold > 0; }
};

// Exact-match span scores for the two claim types. A type with neither gold
// nor predicted spans is left out of the macro average; if both are left
// out the macro scores are 1 (nothing to find, nothing predicted).
struct SpanPRF {
  std::array<SpanCounts, 2> counts;  // [claim_pos, claim_neg]
  std::array<PRF, 2> per_type;
  PRF macro;
};

class SpanScorer {
 public:
  // Adds one review's gold and predicted claim spans. Non-claim spans are
  // ignored. A prediction counts only on an exact (type, start, end) match.
  void add(const std::vector<ArgSpan>& gold, const std::vector<ArgSpan>& pred);
  SpanPRF result() const;

 private:
  std::array<SpanCounts, 2> counts_{};
};

SpanPRF span_prf(const std::vector<ArgSpan>& gold, const std::vector<ArgSpan>& pred);

struct EvidenceScore {
  double exact_match = 0.0;
  double f1 = 0.0;
};

// EM is 1 iff both answers are null or both cover the same token range. F1
// is 2*overlap/(|pred|+|gold|) over tokens; both null gives (1, 1) and
// exactly one null gives (0, 0).
EvidenceScore evidence_em_f1(const EvidenceAnswer& gold, const EvidenceAnswer& pred);

// Running mean of evidence scores across queries.
class EvidenceScorer {
 public:
  void add(const EvidenceAnswer& gold, const EvidenceAnswer& pred);
  EvidenceScore mean() const;
  std::size_t count() const { return n_; }

 private:
  double em_ = 0.0;
  double f1_ = 0.0;
  std::size_t n_ = 0;
};

enum class TokenClass : std::uint8_t { kClaimPos = 0, kClaimNeg, kEvidencePos, kEvidenceNeg, kNone };
inline constexpr int kNumTokenClasses = 5;
std::string_view to_string(TokenClass c);
TokenClass token_class_of(SpanType t);

// Per-token class from a span set. A token overlapping both a claim and an
// evidence span takes the claim class.
std::vector<TokenClass> token_classes(const std::vector<ArgSpan>& spans, const TokenAlignment& a);

struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kNumTokenClasses>, kNumTokenClasses> counts{};

  std::uint64_t total() const;
  // Each row divided by its sum; all-zero rows stay zero.
  std::array<std::array<double, kNumTokenClasses>, kNumTokenClasses> normalized() const;
  ConfusionMatrix& operator+=(const ConfusionMatrix& o);
};

// counts[x][y] = number of tokens labeled x by a and y by b.
ConfusionMatrix token_confusion(const std::vector<TokenClass>& a, const std::vector<TokenClass>& b);

// Token-level scores for the four span classes of a chained claim tagging
// and evidence linkage run.
struct PipelineReport {
  std::array<PRF, 4> per_class;  // indexed by TokenClass, kNone excluded
  std::array<SpanCounts, 4> counts;
  ConfusionMatrix confusion;  // rows gold, columns predicted
};

class PipelineScorer {
 public:
  void add(const std::vector<ArgSpan>& gold_spans, const std::vector<ArgSpan>& pred_spans,
           const TokenAlignment& a);
  PipelineReport result() const;

 private:
  ConfusionMatrix confusion_;
};

// gold[i] and predicted[i] refer to the same review.
PipelineReport pipeline_eval(const std::vector<AnnotatedReview>& gold,
                             const std::vector<std::vector<ArgSpan>>& predicted,
                             const Tokenizer& tokenizer);

struct TTestResult {
  double t = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
};

// Two-sided Welch t-test on two samples of run scores (each of size >= 2).
TTestResult two_sided_t_test(std::span<const double> a, std::span<const double> b);

// Classes with neither gold nor predicted items report null scores.
nlohmann::json to_json(const PRF& s);
nlohmann::json to_json(const SpanPRF& s);
nlohmann::json to_json(const EvidenceScore& s);
nlohmann::json to_json(const ConfusionMatrix& m);
nlohmann::json to_json(const PipelineReport& r);

// One "metric,value" line per scalar, flattening nested JSON keys with '.'.
void write_metrics_csv(std::ostream& out, const nlohmann::json& report);

}  // namespace substan
