#pragma once

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "substan/answer.hpp"
#include "substan/corpus.hpp"
#include "substan/spans.hpp"
#include "substan/text.hpp"

namespace substan {

struct SentenceSegmentation {
  std::vector<CharRange> sentences;  // ordered, disjoint, whitespace-trimmed
};

using Segmenter = std::function<SentenceSegmentation(std::u32string_view)>;

// Splits after '.', '!' or '?' followed by whitespace (skipping common
// abbreviations such as "e.g." and "et al.") and at every line break.
SentenceSegmentation segment_sentences(std::u32string_view text);

enum class Sentiment { kPositive, kNegative, kNeutral };

using SentimentFn = std::function<Sentiment(std::u32string_view sentence)>;
using SimilarityFn = std::function<double(std::u32string_view a, std::u32string_view b)>;

// Deterministic review-domain lexicon classifier. A negator ("not", "no",
// "lack", ...) flips the next sentiment word within three tokens and counts
// as negative on its own.
Sentiment lexicon_sentiment(std::u32string_view sentence);

// Greedy-matching F1 between the word tokens of two texts, with token
// similarity 1 for equal words and character-trigram Dice otherwise. The
// matching scheme of BERTScore over surface strings instead of embeddings.
double lexical_bertscore(std::u32string_view candidate, std::u32string_view reference);

// Positive sentences become claim_pos spans, negative ones claim_neg, at
// sentence bounds minus list markers and final punctuation. claim_ids
// count 1, 2, ... per polarity.
std::vector<ArgSpan> sentiment_claim_baseline(const Review& r, const Segmenter& segmenter,
                                              const SentimentFn& sentiment);

// The sentence most similar to the claim among sentences not overlapping
// it, as its body without list marker or final punctuation; ties go to the
// earliest. nullopt when no candidate exists.
std::optional<CharRange> most_similar_sentence(const Review& r, const ArgSpan& claim,
                                               const Segmenter& segmenter,
                                               const SimilarityFn& similarity);

// most_similar_sentence as a token-level answer over the alignment. Null
// only when there is no candidate sentence.
EvidenceAnswer similarity_evidence_baseline(const Review& r, const ArgSpan& claim,
                                            const Segmenter& segmenter,
                                            const SimilarityFn& similarity,
                                            const TokenAlignment& a);

}  // namespace substan
