#include <random>

#include "doctest.h"
#include "substan/baselines.hpp"
#include "synthetic.hpp"

using namespace substan;

namespace {

Review review(std::u32string text) {
  Review r;
  r.id = "r";
  r.text = std::move(text);
  return r;
}

std::u32string slice(const std::u32string& t, const CharRange& r) { return t.substr(r.start, r.size()); }

}  // namespace

TEST_CASE("sentence segmentation") {
  const std::u32string t = U"We use e.g. CRFs. Results are good! Why?\n- a bullet\n1. numbered item. Et al. agree";
  const auto s = segment_sentences(t).sentences;
  REQUIRE(s.size() == 6);
  CHECK(slice(t, s[0]) == U"We use e.g. CRFs.");
  CHECK(slice(t, s[1]) == U"Results are good!");
  CHECK(slice(t, s[2]) == U"Why?");
  CHECK(slice(t, s[3]) == U"- a bullet");
  CHECK(slice(t, s[4]) == U"1. numbered item.");
  CHECK(slice(t, s[5]) == U"Et al. agree");
  CHECK(segment_sentences(U"Accuracy is 180. Fine.").sentences.size() == 2);
  CHECK(segment_sentences(U"   ").sentences.empty());
}

TEST_CASE("lexicon sentiment") {
  CHECK(lexicon_sentiment(U"The results are impressive.") == Sentiment::kPositive);
  CHECK(lexicon_sentiment(U"The writing is unclear.") == Sentiment::kNegative);
  CHECK(lexicon_sentiment(U"The results are not convincing.") == Sentiment::kNegative);
  CHECK(lexicon_sentiment(U"The paper studies segmentation.") == Sentiment::kNeutral);
}

TEST_CASE("claim baseline") {
  CHECK(sentiment_claim_baseline(review(U"The paper studies segmentation. It uses a CRF."),
                                 segment_sentences, lexicon_sentiment)
            .empty());

  const std::u32string t = U"The paper studies segmentation.\n- The idea is novel.\n- The evaluation is weak.";
  const auto claims = sentiment_claim_baseline(review(t), segment_sentences, lexicon_sentiment);
  REQUIRE(claims.size() == 2);
  CHECK(claims[0].type == SpanType::kClaimPos);
  CHECK(slice(t, claims[0].range()) == U"The idea is novel");
  CHECK(claims[0].claim_id == 1);
  CHECK(claims[1].type == SpanType::kClaimNeg);
  CHECK(slice(t, claims[1].range()) == U"The evaluation is weak");
  CHECK(claims[1].claim_id == 1);
}

TEST_CASE("claims sit inside sentences and runs are repeatable") {
  const auto corpus = testing::synthetic_corpus({30, 11});
  for (const auto& r : corpus) {
    const auto a = sentiment_claim_baseline(r.review, segment_sentences, lexicon_sentiment);
    CHECK(a == sentiment_claim_baseline(r.review, segment_sentences, lexicon_sentiment));
    const auto sentences = segment_sentences(r.review.text).sentences;
    for (const auto& c : a) {
      CHECK(std::any_of(sentences.begin(), sentences.end(), [&](const CharRange& s) {
        return s.start <= c.start && c.end <= s.end;
      }));
    }
  }
}

TEST_CASE("lexical bertscore") {
  CHECK(lexical_bertscore(U"the model is slow", U"the model is slow") == doctest::Approx(1.0));
  CHECK(lexical_bertscore(U"", U"anything") == 0.0);
  CHECK(lexical_bertscore(U"qqq", U"zzz") == 0.0);
  const double near = lexical_bertscore(U"the baseline is weak", U"the baselines are weak");
  CHECK(near > lexical_bertscore(U"the baseline is weak", U"experiments use imagenet"));
  CHECK(near < 1.0);
}

TEST_CASE("most similar sentence") {
  const std::u32string t = U"The speed is bad. Inference takes a day. Training is slow and the speed is bad.";
  const ArgSpan claim{SpanType::kClaimNeg, 0, 16, 1};
  const auto one = most_similar_sentence(review(U"The speed is bad."), claim, segment_sentences,
                                         lexical_bertscore);
  CHECK(!one);

  const auto best = most_similar_sentence(review(t), claim, segment_sentences, lexical_bertscore);
  REQUIRE(best);
  CHECK(slice(t, *best) == U"Training is slow and the speed is bad");

  const auto exact = most_similar_sentence(review(U"Speed is bad. Speed is bad. Speed is bad."),
                                           {SpanType::kClaimNeg, 0, 12, 1}, segment_sentences,
                                           lexical_bertscore);
  REQUIRE(exact);
  CHECK(exact->start == 14);

  const auto a = align_tokens(t, word_punct_tokenize);
  const auto ans = similarity_evidence_baseline(review(t), claim, segment_sentences, lexical_bertscore, a);
  REQUIRE(!ans.is_null());
  CHECK(a.offsets[ans.start_token].start == best->start);
  CHECK(a.offsets[ans.end_token].end == best->end);
}
