#include "substan/agreement.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "substan/errors.hpp"

namespace substan {

using nlohmann::json;

std::vector<MultiAnnotatedReview> group_annotations(const std::vector<AnnotatedReview>& records) {
  std::vector<MultiAnnotatedReview> out;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& rec : records) {
    if (!rec.review.annotator_id || rec.review.annotator_id->empty()) {
      throw DataError("record '" + rec.review.id + "' has no annotator_id");
    }
    auto [it, inserted] = index.emplace(rec.review.id, out.size());
    if (inserted) {
      MultiAnnotatedReview m;
      m.review = rec.review;
      m.review.annotator_id.reset();
      out.push_back(std::move(m));
    }
    auto& group = out[it->second];
    if (group.review.text != rec.review.text) {
      throw DataError("annotations of review '" + rec.review.id + "' disagree on the text");
    }
    for (const auto& l : group.layers) {
      if (l.annotator_id == *rec.review.annotator_id) {
        throw DataError("annotator '" + l.annotator_id + "' labeled review '" + rec.review.id +
                        "' twice");
      }
    }
    group.layers.push_back({*rec.review.annotator_id, rec.spans});
  }
  return out;
}

std::vector<MultiAnnotatedReview> load_annotator_corpus(const std::filesystem::path& path,
                                                        const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file " + path.string());
  // Review ids repeat across annotators; key the per-record uniqueness check
  // on (id, annotator) by rewriting ids before validation.
  std::vector<AnnotatedReview> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream one(line);
    try {
      auto rec = read_corpus(one, options);
      records.push_back(std::move(rec.front()));
    } catch (const DataError& e) {
      throw DataError(path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return group_annotations(records);
}

Unitization unitize(const std::vector<ArgSpan>& spans, const TokenAlignment& a) {
  const auto classes = token_classes(spans, a);
  std::vector<bool> starts(a.size(), false);
  for (const auto& s : spans) {
    const auto [first, last] = a.overlapping(s.range());
    for (std::size_t t = first; t < last; ++t) {
      if (classes[t] == token_class_of(s.type)) {
        starts[t] = true;
        break;
      }
    }
  }
  Unitization out;
  for (std::size_t t = 0; t < classes.size(); ++t) {
    const bool split = out.empty() || out.back().category != classes[t] ||
                       (starts[t] && classes[t] != TokenClass::kNone);
    if (split) {
      out.push_back({classes[t], t, t + 1});
    } else {
      out.back().end = t + 1;
    }
  }
  return out;
}

namespace {

void check_partition(const Unitization& u, std::size_t length) {
  std::size_t pos = 0;
  for (const auto& s : u) {
    if (s.begin != pos || s.end <= s.begin) {
      throw UsageError("sections must partition the continuum in order");
    }
    pos = s.end;
  }
  if (pos != length) throw UsageError("sections do not cover the whole continuum");
}

}  // namespace

double unitizing_alpha(const std::vector<Continuum>& reviews) {
  constexpr int K = kNumTokenClasses;
  std::array<std::array<double, K>, K> o{};
  std::size_t total_length = 0;
  for (const auto& r : reviews) {
    const std::size_t m = r.annotators.size();
    if (m < 2) throw UsageError("unitizing alpha needs at least two annotators per review");
    for (const auto& u : r.annotators) check_partition(u, r.length);
    total_length += r.length;
    const double w = 1.0 / static_cast<double>(m - 1);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (i == j) continue;
        // Two-pointer sweep over the ordered sections of i and j.
        const auto& a = r.annotators[i];
        const auto& b = r.annotators[j];
        std::size_t p = 0, q = 0;
        while (p < a.size() && q < b.size()) {
          const std::size_t lo = std::max(a[p].begin, b[q].begin);
          const std::size_t hi = std::min(a[p].end, b[q].end);
          if (hi > lo) {
            o[static_cast<int>(a[p].category)][static_cast<int>(b[q].category)] +=
                w * static_cast<double>(hi - lo);
          }
          if (a[p].end <= b[q].end) ++p; else ++q;
        }
      }
    }
  }
  if (total_length == 0) throw UsageError("unitizing alpha needs a non-empty continuum");

  std::array<double, K> marginal{};
  double n = 0.0;
  for (int c = 0; c < K; ++c) {
    for (int k = 0; k < K; ++k) marginal[c] += o[c][k];
    n += marginal[c];
  }
  double observed = 0.0;
  double expected = 0.0;
  for (int c = 0; c < K; ++c) {
    for (int k = 0; k < K; ++k) {
      if (c == k) continue;
      observed += o[c][k];
      expected += marginal[c] * marginal[k];
    }
  }
  observed /= n;
  expected /= n * (n - 1.0);
  if (expected == 0.0) return 1.0;
  return 1.0 - observed / expected;
}

AgreementReport agreement_report(const std::vector<MultiAnnotatedReview>& reviews,
                                 const Tokenizer& tokenizer) {
  AgreementReport report;
  std::vector<Continuum> continua;
  std::set<std::string> annotators;
  for (const auto& r : reviews) {
    if (r.layers.size() < 2) continue;
    const auto a = align_tokens(r.review.text, tokenizer);
    Continuum c;
    c.length = a.size();
    std::vector<std::vector<TokenClass>> classes;
    for (const auto& l : r.layers) {
      c.annotators.push_back(unitize(l.spans, a));
      classes.push_back(token_classes(l.spans, a));
      annotators.insert(l.annotator_id);
    }
    for (std::size_t i = 0; i < r.layers.size(); ++i) {
      for (std::size_t j = i + 1; j < r.layers.size(); ++j) {
        auto key = std::pair{r.layers[i].annotator_id, r.layers[j].annotator_id};
        auto ci = classes[i];
        auto cj = classes[j];
        if (key.first > key.second) {
          std::swap(key.first, key.second);
          std::swap(ci, cj);
        }
        report.pair_confusion[key] += token_confusion(ci, cj);
      }
    }
    continua.push_back(std::move(c));
  }
  if (continua.empty()) throw UsageError("no review carries two or more annotation layers");
  report.u_alpha = unitizing_alpha(continua);
  report.n_reviews = continua.size();
  report.n_annotators = annotators.size();
  return report;
}

json to_json(const AgreementReport& r) {
  json pairs = json::array();
  for (const auto& [key, m] : r.pair_confusion) {
    pairs.push_back({{"annotator_a", key.first}, {"annotator_b", key.second}, {"confusion", to_json(m)}});
  }
  return {{"u_alpha", r.u_alpha},
          {"n_reviews", r.n_reviews},
          {"n_annotators", r.n_annotators},
          {"pairs", pairs}};
}

namespace {

// 0 none, 1 claim_pos, 2 claim_neg.
int claim_type(BioLabel l) {
  switch (l) {
    case BioLabel::kBPos: case BioLabel::kIPos: return 1;
    case BioLabel::kBNeg: case BioLabel::kINeg: return 2;
    default: return 0;
  }
}

bool is_begin(BioLabel l) { return l == BioLabel::kBPos || l == BioLabel::kBNeg; }

}  // namespace

std::vector<ArgSpan> consensus_claims(const std::vector<AnnotatorLayer>& layers,
                                      const TokenAlignment& a) {
  if (layers.size() != 3) {
    throw UsageError("claim consensus needs exactly three layers, got " +
                     std::to_string(layers.size()));
  }
  std::vector<LabelSequence> votes;
  for (const auto& l : layers) votes.push_back(encode_bio(l.spans, a).labels);

  LabelSequence merged(a.size(), BioLabel::kO);
  int prev = 0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    std::array<int, 3> type_votes{};
    std::array<int, 3> begin_votes{};
    for (const auto& v : votes) {
      ++type_votes[claim_type(v[t])];
      if (is_begin(v[t])) ++begin_votes[claim_type(v[t])];
    }
    int winner = 0;
    for (int k = 1; k <= 2; ++k) {
      if (type_votes[k] >= 2) winner = k;
    }
    if (winner == 0) {
      merged[t] = BioLabel::kO;
    } else {
      const bool begin = prev != winner || begin_votes[winner] >= 2;
      if (winner == 1) merged[t] = begin ? BioLabel::kBPos : BioLabel::kIPos;
      else merged[t] = begin ? BioLabel::kBNeg : BioLabel::kINeg;
    }
    prev = winner;
  }
  return decode_bio(merged, a);
}

std::vector<ArgSpan> match_claims(std::u32string_view text, const ArgSpan& aggregated_claim,
                                  const std::vector<ArgSpan>& annotator_claims, double threshold) {
  const auto words = whitespace_tokenize(text);
  std::vector<ArgSpan> out;
  for (const auto& c : annotator_claims) {
    if (!is_claim(c.type)) continue;
    std::size_t total = 0;
    std::size_t shared = 0;
    for (const auto& w : words) {
      if (!w.overlaps(c.range())) continue;
      ++total;
      if (w.overlaps(aggregated_claim.range())) ++shared;
    }
    if (total > 0 && static_cast<double>(shared) + 1e-9 >= threshold * static_cast<double>(total)) {
      out.push_back(c);
    }
  }
  return out;
}

std::vector<ArgSpan> consensus_evidence(std::u32string_view text,
                                        const std::vector<ArgSpan>& aggregated_claims,
                                        const std::vector<AnnotatorLayer>& layers,
                                        const TokenAlignment& a, double threshold) {
  std::vector<ArgSpan> out;
  for (const auto& claim : aggregated_claims) {
    std::vector<int> votes(a.size(), 0);
    for (const auto& layer : layers) {
      AnnotatedReview view;
      view.spans = layer.spans;
      std::vector<bool> mine(a.size(), false);
      for (const auto& matched : match_claims(text, claim, view.claims(), threshold)) {
        const auto ev = view.evidence_for(matched);
        if (!ev) continue;
        const auto [first, last] = a.overlapping(ev->range());
        for (std::size_t t = first; t < last; ++t) mine[t] = true;
      }
      for (std::size_t t = 0; t < a.size(); ++t) votes[t] += mine[t];
    }
    std::size_t best_begin = 0, best_len = 0;
    for (std::size_t t = 0; t < a.size();) {
      if (votes[t] < 2) {
        ++t;
        continue;
      }
      const std::size_t begin = t;
      while (t < a.size() && votes[t] >= 2) ++t;
      if (t - begin > best_len) {
        best_begin = begin;
        best_len = t - begin;
      }
    }
    if (best_len == 0) continue;
    const CharRange r = a.char_range(best_begin, best_begin + best_len);
    out.push_back({evidence_type_for(claim.type), r.start, r.end, claim.claim_id});
  }
  return out;
}

AnnotatedReview consensus_review(const MultiAnnotatedReview& r, const Tokenizer& tokenizer) {
  const auto a = align_tokens(r.review.text, tokenizer);
  AnnotatedReview out;
  out.review = r.review;
  out.spans = consensus_claims(r.layers, a);
  // Evidence spans must stay disjoint; a later claim loses a contested stretch.
  std::vector<ArgSpan> kept;
  for (const auto& ev : consensus_evidence(r.review.text, out.spans, r.layers, a)) {
    const bool clash = std::any_of(kept.begin(), kept.end(),
                                   [&](const ArgSpan& k) { return k.range().overlaps(ev.range()); });
    if (!clash) kept.push_back(ev);
  }
  out.spans.insert(out.spans.end(), kept.begin(), kept.end());
  std::stable_sort(out.spans.begin(), out.spans.end(),
                   [](const ArgSpan& x, const ArgSpan& y) { return x.start < y.start; });
  return out;
}

}  // namespace substan
