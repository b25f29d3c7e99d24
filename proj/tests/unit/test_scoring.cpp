#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "substan/errors.hpp"
#include "substan/random.hpp"
#include "substan/scoring.hpp"
#include "synthetic.hpp"

using namespace substan;

namespace {

AnnotatedReview words_review(std::size_t n, std::string venue = "ICLR", int year = 2019) {
  AnnotatedReview r;
  r.review.id = "r";
  r.review.venue = std::move(venue);
  r.review.year = year;
  for (std::size_t i = 0; i < n; ++i) r.review.text += U"word ";
  return r;
}

}  // namespace

TEST_CASE("substantiation score examples") {
  const auto empty = substan_score(words_review(300));
  CHECK(empty.pct_supported == 100.0);
  CHECK(empty.score == 300.0);

  auto r = words_review(400);
  r.spans = {{SpanType::kClaimPos, 0, 4, 1},     {SpanType::kClaimPos, 10, 14, 2},
             {SpanType::kClaimNeg, 20, 24, 1},   {SpanType::kClaimNeg, 30, 34, 2},
             {SpanType::kEvidencePos, 40, 44, 2}, {SpanType::kEvidenceNeg, 50, 54, 1}};
  const auto s = substan_score(r);
  CHECK(s.n_claims() == 4);
  CHECK(s.n_supported() == 2);
  CHECK(s.pct_supported == 50.0);
  CHECK(s.score == 200.0);
  CHECK(s.review_len_words == 400);

  const auto t = substan_score(testing::table1_review());
  CHECK(t.pct_supported == 50.0);
  CHECK(t.n_supported_neg == 2);
  CHECK(t.n_supported_pos == 0);
}

TEST_CASE("score is monotone in supported claims and length") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 10 + uniform_index(rng, 300);
    auto r = words_review(n);
    const int claims = 1 + static_cast<int>(uniform_index(rng, 5));
    for (int c = 0; c < claims; ++c) r.spans.push_back({SpanType::kClaimNeg, 5u * c, 5u * c + 4, c + 1});
    double prev = substan_score(r).score;
    for (int c = 0; c < claims; ++c) {
      r.spans.push_back({SpanType::kEvidenceNeg, 40u + 5u * c, 44u + 5u * c, c + 1});
      const double now = substan_score(r).score;
      CHECK(now > prev);
      prev = now;
    }
    CHECK(prev == doctest::Approx(static_cast<double>(n)));
    auto longer = r;
    longer.review.text += U"more ";
    CHECK(substan_score(longer).score > substan_score(r).score);
  }
}

TEST_CASE("stats aggregation") {
  auto a = words_review(100);
  a.spans = {{SpanType::kClaimPos, 0, 4, 1}, {SpanType::kEvidencePos, 10, 14, 1}};
  const auto only = corpus_stats({a});
  REQUIRE(only.size() == 1);
  CHECK(only[0].claims_pos == 1.0);
  CHECK(only[0].pct_supported_pos == 100.0);
  CHECK(!only[0].pct_supported_neg);
  CHECK(only[0].n_reviews == 1);
  CHECK(only[0].review_len == 100.0);

  auto b = words_review(50, "ACL", 2017);
  b.spans = {{SpanType::kClaimNeg, 0, 4, 1}, {SpanType::kClaimNeg, 5, 9, 2}};
  const auto two = corpus_stats({a, b, words_review(30)});
  REQUIRE(two.size() == 2);
  CHECK(two[0].venue == "ACL");
  CHECK(two[0].pct_supported_neg == 0.0);
  CHECK(two[1].n_reviews == 2);
  CHECK(two[1].claims_all == 0.5);
  CHECK(two[1].pct_supported_all == 100.0);
  CHECK_THROWS_AS(corpus_stats({}), UsageError);

  std::ostringstream csv;
  write_stats_csv(csv, two);
  const std::string out = csv.str();
  CHECK(std::count(out.begin(), out.end(), '\n') == 3);
  CHECK(out.rfind("venue,year,", 0) == 0);
}

TEST_CASE("average ranks") {
  const std::vector<double> v = {10, 20, 20, 5, 20};
  CHECK(average_ranks(v) == std::vector<double>{2, 4, 4, 1, 4});
}

TEST_CASE("spearman") {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const std::vector<double> up = {2, 4, 8, 16, 32};
  const std::vector<double> down = {5, 4, 3, 2, 1};
  CHECK(spearman(x, up).rho == doctest::Approx(1.0));
  CHECK(spearman(x, down).rho == doctest::Approx(-1.0));
  CHECK(spearman(x, up).p_value < 1e-6);

  const std::vector<double> ties = {1, 2, 2, 3, 5};
  const std::vector<double> other = {3, 1, 4, 1, 5};
  CHECK(spearman(ties, other).rho == doctest::Approx(oracle::spearman_rho(ties, other)).epsilon(1e-12));
  const std::vector<double> two = {1, 2};
  CHECK_THROWS_AS(spearman(two, two), UsageError);
  const std::vector<double> flat = {1, 1, 1, 1, 1};
  CHECK_THROWS_AS(spearman(flat, x), UsageError);

  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> p, q;
    for (int i = 0; i < 12; ++i) {
      p.push_back(static_cast<double>(uniform_index(rng, 5)));
      q.push_back(static_cast<double>(uniform_index(rng, 5)));
    }
    if (average_ranks(p) == std::vector<double>(12, 6.5) || average_ranks(q) == std::vector<double>(12, 6.5)) continue;
    const auto c = spearman(p, q);
    CHECK(c.rho == doctest::Approx(oracle::spearman_rho(p, q)).epsilon(1e-9));
    CHECK(c.p_value >= 0.0);
    CHECK(c.p_value <= 1.0);
  }
}
