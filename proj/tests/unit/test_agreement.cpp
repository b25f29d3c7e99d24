#include <algorithm>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "substan/agreement.hpp"
#include "substan/errors.hpp"
#include "substan/random.hpp"

using namespace substan;

namespace {

Unitization random_unitization(std::mt19937_64& rng, std::size_t length, int categories) {
  Unitization u;
  std::size_t pos = 0;
  while (pos < length) {
    const std::size_t len = 1 + uniform_index(rng, std::min<std::size_t>(6, length - pos));
    u.push_back({static_cast<TokenClass>(uniform_index(rng, categories)), pos, pos + len});
    pos += len;
  }
  return u;
}

Continuum random_continuum(std::mt19937_64& rng, std::size_t length, std::size_t annotators) {
  Continuum c{length, {}};
  for (std::size_t i = 0; i < annotators; ++i) c.annotators.push_back(random_unitization(rng, length, 5));
  return c;
}

AnnotatorLayer layer(std::string id, std::vector<ArgSpan> spans) { return {std::move(id), std::move(spans)}; }

std::vector<std::tuple<SpanType, std::size_t, std::size_t>> shape(const std::vector<ArgSpan>& s) {
  std::vector<std::tuple<SpanType, std::size_t, std::size_t>> out;
  for (const auto& x : s) out.emplace_back(x.type, x.start, x.end);
  return out;
}

}  // namespace

TEST_CASE("identical annotators agree perfectly") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto u = random_unitization(rng, 30, 5);
    CHECK(unitizing_alpha({Continuum{30, {u, u, u}}}) == doctest::Approx(1.0));
  }
  const Unitization gap = {{TokenClass::kNone, 0, 10}};
  CHECK(unitizing_alpha({Continuum{10, {gap, gap}}}) == 1.0);
}

TEST_CASE("alpha matches the token-level oracle") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Continuum> reviews;
    const std::size_t m = 2 + uniform_index(rng, 3);
    for (std::size_t r = 0, n = 1 + uniform_index(rng, 3); r < n; ++r) {
      reviews.push_back(random_continuum(rng, 20, m));
    }
    CHECK(unitizing_alpha(reviews) == doctest::Approx(oracle::token_alpha(reviews)).epsilon(1e-9));
  }
}

TEST_CASE("alpha ignores annotator and review order") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Continuum> reviews = {random_continuum(rng, 25, 3), random_continuum(rng, 15, 3)};
    const double base = unitizing_alpha(reviews);
    std::reverse(reviews.begin(), reviews.end());
    for (auto& c : reviews) shuffle_in_place(c.annotators, rng);
    CHECK(unitizing_alpha(reviews) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("alpha preconditions") {
  const Unitization u = {{TokenClass::kNone, 0, 5}};
  CHECK_THROWS_AS(unitizing_alpha({Continuum{5, {u}}}), UsageError);
  CHECK_THROWS_AS(unitizing_alpha({Continuum{6, {u, u}}}), UsageError);
  CHECK_THROWS_AS(unitizing_alpha({}), UsageError);
}

TEST_CASE("unitize covers the continuum") {
  const auto a = align_tokens(U"aa bb cc dd ee", whitespace_tokenize);
  const auto u = unitize({{SpanType::kClaimNeg, 3, 8, 1}, {SpanType::kEvidenceNeg, 6, 14, 1}}, a);
  REQUIRE(u.size() == 3);
  CHECK(u[0].category == TokenClass::kNone);
  CHECK(u[1].category == TokenClass::kClaimNeg);
  CHECK(u[1].begin == 1);
  CHECK(u[1].end == 3);
  CHECK(u[2].category == TokenClass::kEvidenceNeg);
  CHECK(u[2].end == 5);
}

TEST_CASE("consensus claims") {
  const std::u32string t = U"aa bb cc dd ee ff";
  const auto a = align_tokens(t, whitespace_tokenize);
  const ArgSpan neg{SpanType::kClaimNeg, 3, 8, 1};
  const ArgSpan pos{SpanType::kClaimPos, 3, 8, 1};

  const auto two_of_three = consensus_claims({layer("a", {neg}), layer("b", {neg}), layer("c", {pos})}, a);
  REQUIRE(two_of_three.size() == 1);
  CHECK(shape(two_of_three) == shape({neg}));

  CHECK(consensus_claims({layer("a", {neg}), layer("b", {pos}), layer("c", {})}, a).empty());

  const std::vector<ArgSpan> claims = {{SpanType::kClaimPos, 0, 5, 1}, {SpanType::kClaimPos, 6, 11, 2},
                                       {SpanType::kClaimNeg, 12, 17, 1}};
  CHECK(shape(consensus_claims({layer("a", claims), layer("b", claims), layer("c", claims)}, a)) ==
        shape(claims));

  CHECK_THROWS_AS(consensus_claims({layer("a", {neg}), layer("b", {neg})}, a), UsageError);
}

TEST_CASE("claim matching threshold") {
  const std::u32string t = U"w0 w1 w2 w3 w4 w5 w6 w7 w8 w9 x0 x1";
  const ArgSpan ann{SpanType::kClaimNeg, 0, 29, 1};  // w0..w9
  const ArgSpan six{SpanType::kClaimNeg, 12, 35, 1};  // w4..x1
  const ArgSpan five{SpanType::kClaimNeg, 15, 35, 1};  // w5..x1
  CHECK(match_claims(t, six, {ann}).size() == 1);
  CHECK(match_claims(t, five, {ann}).empty());
  CHECK(match_claims(t, {SpanType::kClaimNeg, 30, 35, 1}, {ann}).empty());
}

TEST_CASE("consensus evidence") {
  const std::u32string t = U"aa bb cc dd ee ff gg";
  const auto a = align_tokens(t, whitespace_tokenize);
  const ArgSpan claim{SpanType::kClaimNeg, 0, 5, 1};
  const ArgSpan ev{SpanType::kEvidenceNeg, 9, 14, 1};
  const ArgSpan other{SpanType::kEvidenceNeg, 15, 20, 1};

  const auto agreed = consensus_evidence(t, {claim}, {layer("a", {claim, ev}), layer("b", {claim, ev}),
                                                     layer("c", {claim, other})}, a);
  REQUIRE(agreed.size() == 1);
  CHECK(agreed[0].type == SpanType::kEvidenceNeg);
  CHECK(agreed[0].start == 9);
  CHECK(agreed[0].end == 14);
  CHECK(agreed[0].claim_id == 1);

  CHECK(consensus_evidence(t, {claim}, {layer("a", {claim, ev}), layer("b", {claim}),
                                        layer("c", {claim, other})}, a)
            .empty());
}
