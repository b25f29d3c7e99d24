#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "substan/corpus.hpp"
#include "substan/metrics.hpp"
#include "substan/spans.hpp"

namespace substan {

struct AnnotatorLayer {
  std::string annotator_id;
  std::vector<ArgSpan> spans;
};

// One review with the independent annotations of several annotators.
struct MultiAnnotatedReview {
  Review review;  // annotator_id cleared
  std::vector<AnnotatorLayer> layers;
};

// Reads the corpus format with an `annotator_id` on every record; records
// sharing a review id are grouped (their texts must be identical). Review
// order follows first appearance, layers keep file order.
std::vector<MultiAnnotatedReview> load_annotator_corpus(const std::filesystem::path& path,
                                                        const LoadOptions& options = {});
std::vector<MultiAnnotatedReview> group_annotations(const std::vector<AnnotatedReview>& records);

// A stretch of the token continuum assigned one category; the gap category
// is TokenClass::kNone.
struct Section {
  TokenClass category = TokenClass::kNone;
  std::size_t begin = 0;
  std::size_t end = 0;
};

// One annotator's partition of [0, length) into ordered, contiguous sections.
using Unitization = std::vector<Section>;

struct Continuum {
  std::size_t length = 0;
  std::vector<Unitization> annotators;
};

// Token-level sections for a span layer: each claim/evidence span becomes a
// section (claims win where a claim and an evidence span share tokens) and
// the rest of the continuum is gap.
Unitization unitize(const std::vector<ArgSpan>& spans, const TokenAlignment& a);

// Krippendorff's unitizing alpha with a nominal difference over the five
// mutually exclusive categories (four span types plus gap). Each pair of
// sections from two different annotators of the same review contributes
// its intersection length to the coincidence of their categories, weighted
// 1/(m-1) for m annotators:
//   uDo = sum_{c!=k} o_ck / n,   uDe = sum_{c!=k} n_c n_k / (n (n-1)),
//   uα = 1 - uDo / uDe,
// where n_c are the coincidence marginals and n = sum_c n_c. A continuum
// with a single category throughout has uDo = uDe = 0 and scores 1.
// Throws UsageError for fewer than two annotators, an empty continuum, or
// sections that do not partition [0, length).
double unitizing_alpha(const std::vector<Continuum>& reviews);

struct AgreementReport {
  double u_alpha = 0.0;
  std::size_t n_reviews = 0;
  std::size_t n_annotators = 0;
  // Token confusion per annotator pair (i < j), pooled over reviews.
  std::map<std::pair<std::string, std::string>, ConfusionMatrix> pair_confusion;
};

AgreementReport agreement_report(const std::vector<MultiAnnotatedReview>& reviews,
                                 const Tokenizer& tokenizer);
nlohmann::json to_json(const AgreementReport& r);

// Token-level majority vote (at least two of three) over the claim labels of
// exactly three layers, decoded to spans. A token whose claim type wins
// starts a new span when the previous token has a different winning type
// or when at least two annotators begin a claim there.
std::vector<ArgSpan> consensus_claims(const std::vector<AnnotatorLayer>& layers,
                                      const TokenAlignment& a);

// Annotator claims whose whitespace-word overlap with the aggregated claim
// is at least threshold of the annotator claim's word count.
std::vector<ArgSpan> match_claims(std::u32string_view text, const ArgSpan& aggregated_claim,
                                  const std::vector<ArgSpan>& annotator_claims,
                                  double threshold = 0.6);

// For each aggregated claim, evidence linked to it by matched annotator
// claims is voted on per token (one vote per annotator); the longest
// contiguous run with at least two votes becomes its evidence, earliest
// run on ties. Claims without a majority stay unsupported.
std::vector<ArgSpan> consensus_evidence(std::u32string_view text,
                                        const std::vector<ArgSpan>& aggregated_claims,
                                        const std::vector<AnnotatorLayer>& layers,
                                        const TokenAlignment& a, double threshold = 0.6);

// Consensus claims and evidence as a single annotated review.
AnnotatedReview consensus_review(const MultiAnnotatedReview& r, const Tokenizer& tokenizer);

}  // namespace substan
