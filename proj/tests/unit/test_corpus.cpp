#include <algorithm>
#include <set>
#include <sstream>

#include "doctest.h"
#include "substan/corpus.hpp"
#include "substan/errors.hpp"
#include "synthetic.hpp"

using namespace substan;

namespace {

std::vector<AnnotatedReview> read(const std::string& s) {
  std::istringstream in(s);
  return read_corpus(in);
}

std::string message_of(const std::string& s) {
  try {
    read(s);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

AnnotatedReview two_claims() {
  AnnotatedReview r;
  r.review.id = "r";
  r.review.text = U"Good idea. Weak results because of noise.";
  r.spans = {{SpanType::kClaimPos, 0, 9, 1},
             {SpanType::kClaimNeg, 11, 23, 1},
             {SpanType::kEvidenceNeg, 32, 40, 1}};
  return r;
}

bool has_rule(const std::vector<Violation>& v, const std::string& rule) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.rule == rule; });
}

}  // namespace

TEST_CASE("record without spans loads with empty spans") {
  const auto c = read(R"({"id":"a","text":"Nice.","venue":"ACL","year":2017,"spans":[]})");
  REQUIRE(c.size() == 1);
  CHECK(c[0].spans.empty());
  CHECK(c[0].review.text == U"Nice.");
}

TEST_CASE("the dataset example review has six spans with resolving links") {
  const auto r = testing::table1_review();
  std::ostringstream out;
  write_corpus(out, {r});
  const auto back = read(out.str());
  REQUIRE(back.size() == 1);
  CHECK(back[0].spans.size() == 6);
  CHECK(back[0].claims().size() == 4);
  for (const auto& c : back[0].claims()) {
    CHECK(back[0].evidence_for(c).has_value() == (c.type == SpanType::kClaimNeg));
  }
  CHECK(validate_review(back[0]).empty());
}

TEST_CASE("dangling evidence link names the record id") {
  const std::string rec =
      R"({"id":"rev-7","venue":"ACL","year":2017,"text":"Bad. Because.","spans":[{"type":"claim_neg","start":0,"end":3,"claim_id":1},)"
      R"({"type":"evidence_neg","start":5,"end":12,"claim_id":2}]})";
  const std::string msg = message_of(rec);
  CHECK(msg.find("rev-7") != std::string::npos);
  CHECK(msg.find("dangling-claim-id") != std::string::npos);
}

TEST_CASE("loader errors carry line numbers") {
  const std::string ok = R"({"id":"a","venue":"ACL","year":2017,"text":"x","spans":[]})";
  CHECK(message_of(ok + "\n{broken").find("line 2") != std::string::npos);
  CHECK(message_of(ok + "\n" + ok).find("duplicate review id") != std::string::npos);
  CHECK(message_of(R"({"id":"a","venue":"ACL","year":2017,"text":"x","spans":[{"type":"claim_odd","start":0,"end":1,"claim_id":1}]})")
            .find("claim_odd") != std::string::npos);
  CHECK(message_of(R"({"id":"a","venue":"ACL","year":2017,"text":"x","spans":[{"type":"claim_pos","start":0,"end":5,"claim_id":1}]})")
            .find("bounds") != std::string::npos);
}

TEST_CASE("blank lines are skipped") { CHECK(read("\n{\"id\":\"a\",\"venue\":\"V\",\"year\":1,\"text\":\"x\"}\n\n").size() == 1); }

TEST_CASE("validate_review rules") {
  CHECK(validate_review(two_claims()).empty());

  auto r = two_claims();
  r.spans[1].start = 5;  // claims share characters
  auto v = validate_review(r);
  CHECK(v.size() == 1);
  CHECK(v[0].rule == "claim-overlap");

  r = two_claims();
  r.spans[2].type = SpanType::kEvidencePos;  // linked to claim_pos 1, fine
  CHECK(validate_review(r).empty());
  r.spans[2].claim_id = 2;
  CHECK(has_rule(validate_review(r), "dangling-claim-id"));

  r = two_claims();
  r.spans.push_back({SpanType::kEvidenceNeg, 24, 31, 1});
  std::stable_sort(r.spans.begin(), r.spans.end(),
                   [](const ArgSpan& a, const ArgSpan& b) { return a.start < b.start; });
  CHECK(has_rule(validate_review(r), "multiple-evidence"));

  r = two_claims();
  r.spans[0].end = 100;
  CHECK(has_rule(validate_review(r), "bounds"));

  r = two_claims();
  std::swap(r.spans[0], r.spans[1]);
  CHECK(has_rule(validate_review(r), "unsorted"));

  r = two_claims();
  r.spans[1].claim_id = 1;
  r.spans[1].type = SpanType::kClaimPos;
  r.spans[2].type = SpanType::kEvidencePos;
  CHECK(has_rule(validate_review(r), "duplicate-claim-id"));

  r = two_claims();
  r.review.human_substantiation = 4;
  CHECK(has_rule(validate_review(r), "rating-range"));
  CHECK(validate_review(r, {1, 5}).empty());

  r = two_claims();
  r.review.id.clear();
  CHECK(has_rule(validate_review(r), "empty-id"));
}

TEST_CASE("evidence linked to the other polarity is one polarity mismatch") {
  AnnotatedReview r;
  r.review.id = "p";
  r.review.text = U"Bad work. Because x.";
  r.spans = {{SpanType::kClaimNeg, 0, 8, 1}, {SpanType::kEvidencePos, 10, 19, 1}};
  const auto v = validate_review(r);
  REQUIRE(v.size() == 1);
  CHECK(v[0].rule == "polarity-mismatch");
}

TEST_CASE("serialize then load is the identity") {
  testing::SynthOptions o;
  o.n_reviews = 30;
  auto corpus = testing::synthetic_corpus(o);
  corpus.push_back(testing::table1_review());
  std::mt19937_64 rng(5);
  for (int i = 0; i < 30; ++i) {
    auto r = testing::random_review(rng, 30, 5);
    r.review.id = "rand-" + std::to_string(i);
    if (i % 3 == 0) r.review.human_substantiation = 1 + i % 3;
    corpus.push_back(r);
  }
  std::ostringstream out;
  write_corpus(out, corpus);
  CHECK(read(out.str()) == corpus);
}

TEST_CASE("split sizes and determinism") {
  auto make = [](std::size_t n) {
    testing::SynthOptions o;
    o.n_reviews = n;
    return testing::synthetic_corpus(o);
  };
  const auto big = make(550);
  const auto s = split_corpus(big, 0.2, 1);
  CHECK(s.train.size() == 440);
  CHECK(s.test.size() == 110);

  const auto ten = make(10);
  const auto a = split_corpus(ten, 0.2, 9);
  const auto b = split_corpus(ten, 0.2, 9);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);

  const auto five = make(5);
  const auto f = split_corpus(five, 0.2, 3);
  CHECK(f.train.size() == 4);
  CHECK(f.test.size() == 1);
  std::set<std::string> ids;
  for (const auto& r : f.train) ids.insert(r.review.id);
  for (const auto& r : f.test) ids.insert(r.review.id);
  CHECK(ids.size() == 5);

  CHECK_THROWS_AS(split_corpus(five, 0.0, 1), UsageError);
  CHECK_THROWS_AS(split_corpus(five, 1.0, 1), UsageError);
  CHECK_THROWS_AS(split_corpus({}, 0.2, 1), UsageError);
}

TEST_CASE("split parts keep input order and partition the corpus") {
  testing::SynthOptions o;
  o.n_reviews = 37;
  const auto c = testing::synthetic_corpus(o);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = split_corpus(c, 0.3, seed);
    CHECK(s.train.size() + s.test.size() == c.size());
    for (const auto* part : {&s.train, &s.test}) {
      std::size_t last = 0;
      for (const auto& r : *part) {
        const auto it = std::find(c.begin(), c.end(), r);
        REQUIRE(it != c.end());
        const auto pos = static_cast<std::size_t>(it - c.begin()) + 1;
        CHECK(pos > last);
        last = pos;
      }
    }
  }
}
