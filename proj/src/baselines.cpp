#include "substan/baselines.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <string>
#include <unordered_set>

namespace substan {

namespace {

constexpr std::array<std::u32string_view, 22> kAbbreviations = {
    U"e.g.", U"i.e.", U"al.", U"etc.", U"vs.", U"cf.", U"fig.", U"figs.", U"sec.", U"eq.",
    U"eqs.", U"tab.", U"no.", U"dr.", U"mr.", U"ms.", U"prof.", U"approx.", U"resp.",
    U"ref.", U"refs.", U"p."};

bool ends_with_abbreviation(std::u32string_view text, std::size_t dot) {
  std::size_t begin = dot;
  while (begin > 0 && !is_space(text[begin - 1])) --begin;
  const std::u32string word = ascii_lower(text.substr(begin, dot + 1 - begin));
  for (auto a : kAbbreviations) {
    if (word.size() >= a.size() && std::u32string_view(word).substr(word.size() - a.size()) == a) {
      return true;
    }
  }
  // Single letters stay attached, and so do numbered list markers ("1.")
  // at the start of a line.
  const std::size_t len = dot - begin;
  if (len == 1) return true;
  std::size_t line = begin;
  while (line > 0 && text[line - 1] != U'\n' && is_space(text[line - 1])) --line;
  if (line > 0 && text[line - 1] != U'\n') return false;
  return len > 0 && std::all_of(text.begin() + static_cast<long>(begin),
                                text.begin() + static_cast<long>(dot),
                                [](char32_t c) { return c >= U'0' && c <= U'9'; });
}

void push_trimmed(std::u32string_view text, std::size_t begin, std::size_t end,
                  std::vector<CharRange>& out) {
  while (begin < end && is_space(text[begin])) ++begin;
  while (end > begin && is_space(text[end - 1])) --end;
  if (begin < end) out.push_back({begin, end});
}

std::vector<std::u32string> words(std::u32string_view text) {
  std::vector<std::u32string> out;
  for (const auto& r : word_punct_tokenize(text)) {
    if (r.size() == 1 && is_punct(text[r.start])) continue;
    out.push_back(ascii_lower(text.substr(r.start, r.size())));
  }
  return out;
}

const std::unordered_set<std::u32string>& positive_words() {
  static const std::unordered_set<std::u32string> kWords = {
      U"interesting", U"promising", U"novel", U"clear", U"clearly", U"good", U"strong",
      U"solid", U"convincing", U"impressive", U"nice", U"excellent", U"important", U"useful",
      U"valuable", U"thorough", U"comprehensive", U"elegant", U"effective", U"improvement",
      U"improves", U"outperforms", U"sound", U"insightful", U"great", U"well", U"easy",
      U"readable", U"original", U"creative", U"compelling", U"helpful", U"significant",
      U"sufficient", U"sufficiently", U"appreciate", U"like", U"enjoyed", U"best", U"reasonable",
      U"adequate", U"detailed", U"rigorous", U"relevant", U"beneficial", U"innovative",
      U"straightforward", U"simple", U"strength", U"strengths", U"advantage", U"contribution"};
  return kWords;
}

const std::unordered_set<std::u32string>& negative_words() {
  static const std::unordered_set<std::u32string> kWords = {
      U"unclear", U"lacks", U"lacking", U"missing", U"weak", U"poor", U"poorly", U"limited",
      U"insufficient", U"insufficiently", U"confusing", U"misleading", U"problematic",
      U"unconvincing", U"incremental", U"trivial", U"wrong", U"questionable", U"concern",
      U"concerns", U"unfortunately", U"fails", U"fail", U"hard", U"difficult", U"doubt",
      U"marginal", U"vague", U"flawed", U"issue", U"issues", U"redundant", U"unfair",
      U"unjustified", U"sloppy", U"worse", U"weakness", U"weaknesses", U"unsupported",
      U"inconsistent", U"overclaim", U"overclaims", U"confused", U"unnecessary", U"ambiguous",
      U"error", U"errors", U"typo", U"typos", U"outdated", U"small", U"minor", U"limitation",
      U"limitations", U"unsatisfactory", U"disappointing", U"superficial"};
  return kWords;
}

const std::unordered_set<std::u32string>& negators() {
  static const std::unordered_set<std::u32string> kWords = {
      U"not", U"no", U"never", U"nor", U"without", U"lack", U"hardly", U"barely", U"isn",
      U"doesn", U"don", U"didn", U"aren", U"wasn", U"cannot"};
  return kWords;
}

std::vector<std::u32string> trigrams(const std::u32string& w) {
  const std::u32string padded = U"#" + w + U"#";
  std::vector<std::u32string> out;
  if (padded.size() < 3) return {padded};
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) out.push_back(padded.substr(i, 3));
  std::sort(out.begin(), out.end());
  return out;
}

double token_similarity(const std::u32string& a, const std::u32string& b) {
  if (a == b) return 1.0;
  const auto ta = trigrams(a);
  const auto tb = trigrams(b);
  std::vector<std::u32string> common;
  std::set_intersection(ta.begin(), ta.end(), tb.begin(), tb.end(), std::back_inserter(common));
  return 2.0 * static_cast<double>(common.size()) / static_cast<double>(ta.size() + tb.size());
}

bool is_digit(char32_t c) { return c >= U'0' && c <= U'9'; }

// The sentence without a leading list marker or trailing punctuation.
CharRange sentence_body(std::u32string_view text, CharRange s) {
  std::size_t b = s.start;
  std::size_t e = s.end;
  const auto skip_space = [&] {
    while (b < e && is_space(text[b])) ++b;
  };
  if (b < e && (text[b] == U'-' || text[b] == U'*' || text[b] == U'\u2022' || text[b] == U'\u2013')) {
    ++b;
    skip_space();
  } else {
    std::size_t k = b;
    if (k < e && text[k] == U'(') ++k;
    const std::size_t mark = k;
    while (k < e && is_digit(text[k])) ++k;
    if (k == mark && k < e && ((text[k] >= U'a' && text[k] <= U'z') || (text[k] >= U'A' && text[k] <= U'Z'))) ++k;
    if (k > mark && k - mark <= 3 && k + 1 < e && (text[k] == U')' || text[k] == U'.') &&
        is_space(text[k + 1])) {
      b = k + 1;
      skip_space();
    }
  }
  while (e > b && (is_space(text[e - 1]) || text[e - 1] == U'.' || text[e - 1] == U'!' ||
                   text[e - 1] == U'?' || text[e - 1] == U';' || text[e - 1] == U':')) {
    --e;
  }
  return b < e ? CharRange{b, e} : s;
}

}  // namespace

SentenceSegmentation segment_sentences(std::u32string_view text) {
  SentenceSegmentation seg;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char32_t c = text[i];
    if (c == U'\n') {
      push_trimmed(text, begin, i, seg.sentences);
      begin = i + 1;
    } else if ((c == U'.' || c == U'!' || c == U'?') &&
               (i + 1 == text.size() || is_space(text[i + 1]))) {
      if (c == U'.' && ends_with_abbreviation(text, i)) continue;
      push_trimmed(text, begin, i + 1, seg.sentences);
      begin = i + 1;
    }
  }
  push_trimmed(text, begin, text.size(), seg.sentences);
  return seg;
}

Sentiment lexicon_sentiment(std::u32string_view sentence) {
  const auto ws = words(sentence);
  int score = 0;
  std::size_t negate_until = 0;
  bool pending_negator = false;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    const auto& w = ws[i];
    int polarity = 0;
    if (positive_words().count(w)) polarity = 1;
    if (negative_words().count(w)) polarity = -1;
    if (polarity != 0) {
      if (i < negate_until) {
        polarity = -polarity;
        pending_negator = false;
      }
      score += polarity;
    }
    if (negators().count(w)) {
      if (pending_negator) score -= 1;
      negate_until = i + 4;
      pending_negator = true;
    } else if (pending_negator && i >= negate_until) {
      score -= 1;
      pending_negator = false;
    }
  }
  if (pending_negator) score -= 1;
  if (score > 0) return Sentiment::kPositive;
  if (score < 0) return Sentiment::kNegative;
  return Sentiment::kNeutral;
}

double lexical_bertscore(std::u32string_view candidate, std::u32string_view reference) {
  const auto c = words(candidate);
  const auto r = words(reference);
  if (c.empty() || r.empty()) return 0.0;
  std::vector<std::vector<double>> sim(c.size(), std::vector<double>(r.size()));
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = 0; j < r.size(); ++j) sim[i][j] = token_similarity(c[i], r[j]);
  }
  double precision = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    precision += *std::max_element(sim[i].begin(), sim[i].end());
  }
  precision /= static_cast<double>(c.size());
  double recall = 0.0;
  for (std::size_t j = 0; j < r.size(); ++j) {
    double best = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) best = std::max(best, sim[i][j]);
    recall += best;
  }
  recall /= static_cast<double>(r.size());
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

std::vector<ArgSpan> sentiment_claim_baseline(const Review& r, const Segmenter& segmenter,
                                              const SentimentFn& sentiment) {
  std::vector<ArgSpan> out;
  int next_pos = 1;
  int next_neg = 1;
  for (const auto& sentence : segmenter(r.text).sentences) {
    const CharRange s = sentence_body(r.text, sentence);
    const auto label = sentiment(std::u32string_view(r.text).substr(s.start, s.size()));
    if (label == Sentiment::kPositive) {
      out.push_back({SpanType::kClaimPos, s.start, s.end, next_pos++});
    } else if (label == Sentiment::kNegative) {
      out.push_back({SpanType::kClaimNeg, s.start, s.end, next_neg++});
    }
  }
  return out;
}

std::optional<CharRange> most_similar_sentence(const Review& r, const ArgSpan& claim,
                                               const Segmenter& segmenter,
                                               const SimilarityFn& similarity) {
  const std::u32string_view text(r.text);
  const auto claim_text = text.substr(claim.start, claim.end - claim.start);
  std::optional<CharRange> best;
  double best_score = 0.0;
  for (const auto& s : segmenter(r.text).sentences) {
    if (s.overlaps(claim.range())) continue;
    const CharRange body = sentence_body(text, s);
    const double score = similarity(claim_text, text.substr(body.start, body.size()));
    if (!best || score > best_score) {
      best = body;
      best_score = score;
    }
  }
  return best;
}

EvidenceAnswer similarity_evidence_baseline(const Review& r, const ArgSpan& claim,
                                            const Segmenter& segmenter,
                                            const SimilarityFn& similarity,
                                            const TokenAlignment& a) {
  const auto sentence = most_similar_sentence(r, claim, segmenter, similarity);
  if (!sentence) return EvidenceAnswer::null();
  const auto [first, last] = a.overlapping(*sentence);
  if (first == last) return EvidenceAnswer::null();
  return EvidenceAnswer::span(first, last - 1);
}

}  // namespace substan
