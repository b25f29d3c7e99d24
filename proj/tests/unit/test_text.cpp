#include "doctest.h"
#include "substan/errors.hpp"
#include "substan/text.hpp"

using namespace substan;

TEST_CASE("utf8 round trip keeps code points") {
  const std::string s = "caf\xC3\xA9 \xE2\x80\x93 \xF0\x9F\x98\x80 ok";
  const auto u = utf8_decode(s);
  CHECK(u.size() == 11);
  CHECK(u[3] == U'é');
  CHECK(utf8_encode(u) == s);
}

TEST_CASE("invalid utf8 is a data error") {
  CHECK_THROWS_AS(utf8_decode("\xC3"), DataError);
  CHECK_THROWS_AS(utf8_decode("\xFF"), DataError);
  CHECK_THROWS_AS(utf8_decode("a\xE2\x80"), DataError);
}

TEST_CASE("whitespace tokenizer") {
  const std::u32string t = U"  Multi-criteria learning\tis\ninteresting ";
  const auto r = whitespace_tokenize(t);
  REQUIRE(r.size() == 4);
  CHECK(t.substr(r[0].start, r[0].size()) == U"Multi-criteria");
  CHECK(t.substr(r[3].start, r[3].size()) == U"interesting");
  CHECK(whitespace_tokenize(U"").empty());
}

TEST_CASE("word_punct tokenizer splits punctuation") {
  const std::u32string t = U"Sec. 6.4 (Bi-LSTM), ok!";
  std::vector<std::u32string> words;
  for (const auto& r : word_punct_tokenize(t)) words.push_back(t.substr(r.start, r.size()));
  const std::vector<std::u32string> expected = {U"Sec", U".", U"6", U".", U"4", U"(", U"Bi",
                                                U"-", U"LSTM", U")", U",", U"ok", U"!"};
  CHECK(words == expected);
}

TEST_CASE("word count is whitespace based") {
  CHECK(word_count(U"") == 0);
  CHECK(word_count(U"a b  c\n d.") == 4);
}
