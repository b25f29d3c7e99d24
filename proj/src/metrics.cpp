#include "substan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>
#include <tuple>

#include <boost/math/distributions/students_t.hpp>

#include "substan/errors.hpp"

namespace substan {

using nlohmann::json;

PRF prf_from_counts(std::uint64_t true_positive, std::uint64_t predicted, std::uint64_t gold) {
  PRF s;
  s.precision = predicted ? static_cast<double>(true_positive) / predicted : 0.0;
  s.recall = gold ? static_cast<double>(true_positive) / gold : 0.0;
  const double sum = s.precision + s.recall;
  s.f1 = sum > 0.0 ? 2.0 * s.precision * s.recall / sum : 0.0;
  return s;
}

void SpanScorer::add(const std::vector<ArgSpan>& gold, const std::vector<ArgSpan>& pred) {
  using Key = std::tuple<SpanType, std::size_t, std::size_t>;
  std::set<Key> gold_keys;
  for (const auto& s : gold) {
    if (!is_claim(s.type)) continue;
    gold_keys.insert({s.type, s.start, s.end});
    ++counts_[is_positive(s.type) ? 0 : 1].gold;
  }
  std::set<Key> seen;
  for (const auto& s : pred) {
    if (!is_claim(s.type)) continue;
    auto& c = counts_[is_positive(s.type) ? 0 : 1];
    ++c.predicted;
    const Key k{s.type, s.start, s.end};
    if (gold_keys.count(k) && seen.insert(k).second) ++c.true_positive;
  }
}

SpanPRF SpanScorer::result() const {
  SpanPRF r;
  r.counts = counts_;
  int present = 0;
  for (int t = 0; t < 2; ++t) {
    r.per_type[t] = prf_from_counts(counts_[t].true_positive, counts_[t].predicted, counts_[t].gold);
    if (!counts_[t].present()) continue;
    ++present;
    r.macro.precision += r.per_type[t].precision;
    r.macro.recall += r.per_type[t].recall;
    r.macro.f1 += r.per_type[t].f1;
  }
  if (present == 0) {
    r.macro = {1.0, 1.0, 1.0};
  } else {
    r.macro.precision /= present;
    r.macro.recall /= present;
    r.macro.f1 /= present;
  }
  return r;
}

SpanPRF span_prf(const std::vector<ArgSpan>& gold, const std::vector<ArgSpan>& pred) {
  SpanScorer s;
  s.add(gold, pred);
  return s.result();
}

EvidenceScore evidence_em_f1(const EvidenceAnswer& gold, const EvidenceAnswer& pred) {
  if (gold.is_null() || pred.is_null()) {
    const double both = (gold.is_null() && pred.is_null()) ? 1.0 : 0.0;
    return {both, both};
  }
  const double em = gold.same_answer(pred) ? 1.0 : 0.0;
  const std::size_t lo = std::max(gold.start_token, pred.start_token);
  const std::size_t hi = std::min(gold.end_token, pred.end_token);
  const std::size_t overlap = hi >= lo ? hi - lo + 1 : 0;
  if (overlap == 0) return {em, 0.0};
  const double precision = static_cast<double>(overlap) / static_cast<double>(pred.length());
  const double recall = static_cast<double>(overlap) / static_cast<double>(gold.length());
  return {em, 2.0 * precision * recall / (precision + recall)};
}

void EvidenceScorer::add(const EvidenceAnswer& gold, const EvidenceAnswer& pred) {
  const auto s = evidence_em_f1(gold, pred);
  em_ += s.exact_match;
  f1_ += s.f1;
  ++n_;
}

EvidenceScore EvidenceScorer::mean() const {
  if (n_ == 0) return {0.0, 0.0};
  return {em_ / static_cast<double>(n_), f1_ / static_cast<double>(n_)};
}

std::string_view to_string(TokenClass c) {
  switch (c) {
    case TokenClass::kClaimPos: return "claim_pos";
    case TokenClass::kClaimNeg: return "claim_neg";
    case TokenClass::kEvidencePos: return "evidence_pos";
    case TokenClass::kEvidenceNeg: return "evidence_neg";
    case TokenClass::kNone: return "none";
  }
  return "?";
}

TokenClass token_class_of(SpanType t) { return static_cast<TokenClass>(static_cast<int>(t)); }

std::vector<TokenClass> token_classes(const std::vector<ArgSpan>& spans, const TokenAlignment& a) {
  std::vector<TokenClass> out(a.size(), TokenClass::kNone);
  // Evidence first so claims overwrite shared tokens.
  for (bool claims : {false, true}) {
    for (const auto& s : spans) {
      if (is_claim(s.type) != claims) continue;
      const auto [first, last] = a.overlapping(s.range());
      for (std::size_t t = first; t < last; ++t) out[t] = token_class_of(s.type);
    }
  }
  return out;
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t n = 0;
  for (const auto& row : counts) n += std::accumulate(row.begin(), row.end(), std::uint64_t{0});
  return n;
}

std::array<std::array<double, kNumTokenClasses>, kNumTokenClasses> ConfusionMatrix::normalized()
    const {
  std::array<std::array<double, kNumTokenClasses>, kNumTokenClasses> out{};
  for (int r = 0; r < kNumTokenClasses; ++r) {
    const auto sum = std::accumulate(counts[r].begin(), counts[r].end(), std::uint64_t{0});
    if (sum == 0) continue;
    for (int c = 0; c < kNumTokenClasses; ++c) {
      out[r][c] = static_cast<double>(counts[r][c]) / static_cast<double>(sum);
    }
  }
  return out;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) {
  for (int r = 0; r < kNumTokenClasses; ++r) {
    for (int c = 0; c < kNumTokenClasses; ++c) counts[r][c] += o.counts[r][c];
  }
  return *this;
}

ConfusionMatrix token_confusion(const std::vector<TokenClass>& a, const std::vector<TokenClass>& b) {
  if (a.size() != b.size()) {
    throw UsageError("token label sequences differ in length (" + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()) + ")");
  }
  ConfusionMatrix m;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++m.counts[static_cast<int>(a[i])][static_cast<int>(b[i])];
  }
  return m;
}

void PipelineScorer::add(const std::vector<ArgSpan>& gold_spans,
                         const std::vector<ArgSpan>& pred_spans, const TokenAlignment& a) {
  confusion_ += token_confusion(token_classes(gold_spans, a), token_classes(pred_spans, a));
}

PipelineReport PipelineScorer::result() const {
  PipelineReport r;
  r.confusion = confusion_;
  for (int c = 0; c < 4; ++c) {
    SpanCounts& k = r.counts[c];
    k.true_positive = confusion_.counts[c][c];
    for (int o = 0; o < kNumTokenClasses; ++o) {
      k.gold += confusion_.counts[c][o];
      k.predicted += confusion_.counts[o][c];
    }
    r.per_class[c] = prf_from_counts(k.true_positive, k.predicted, k.gold);
  }
  return r;
}

PipelineReport pipeline_eval(const std::vector<AnnotatedReview>& gold,
                             const std::vector<std::vector<ArgSpan>>& predicted,
                             const Tokenizer& tokenizer) {
  if (gold.size() != predicted.size()) {
    throw UsageError("gold and predicted review counts differ");
  }
  PipelineScorer scorer;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto a = align_tokens(gold[i].review.text, tokenizer);
    scorer.add(gold[i].spans, predicted[i], a);
  }
  return scorer.result();
}

TTestResult two_sided_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw UsageError("t-test needs at least two runs per sample");
  const auto stats = [](std::span<const double> x) {
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::pair{mean, ss / (n - 1.0)};
  };
  const auto [ma, va] = stats(a);
  const auto [mb, vb] = stats(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double se2 = va / na + vb / nb;
  TTestResult r;
  if (se2 == 0.0) {
    r.t = ma == mb ? 0.0 : std::copysign(INFINITY, ma - mb);
    r.dof = na + nb - 2.0;
    r.p_value = ma == mb ? 1.0 : 0.0;
    return r;
  }
  r.t = (ma - mb) / std::sqrt(se2);
  r.dof = se2 * se2 /
          ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
  const boost::math::students_t dist(r.dof);
  r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.t)));
  return r;
}

json to_json(const PRF& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

json to_json(const SpanPRF& s) {
  json j;
  const char* names[2] = {"claim_pos", "claim_neg"};
  for (int t = 0; t < 2; ++t) {
    j[names[t]] = s.counts[t].present() ? to_json(s.per_type[t])
                                        : json{{"precision", nullptr}, {"recall", nullptr}, {"f1", nullptr}};
    j[names[t]]["true_positive"] = s.counts[t].true_positive;
    j[names[t]]["predicted"] = s.counts[t].predicted;
    j[names[t]]["gold"] = s.counts[t].gold;
  }
  j["macro"] = to_json(s.macro);
  return j;
}

json to_json(const EvidenceScore& s) { return {{"exact_match", s.exact_match}, {"f1", s.f1}}; }

json to_json(const ConfusionMatrix& m) {
  json labels = json::array();
  for (int c = 0; c < kNumTokenClasses; ++c) labels.push_back(to_string(static_cast<TokenClass>(c)));
  json counts = json::array();
  json norm = json::array();
  const auto n = m.normalized();
  for (int r = 0; r < kNumTokenClasses; ++r) {
    counts.push_back(m.counts[r]);
    norm.push_back(n[r]);
  }
  return {{"labels", labels}, {"counts", counts}, {"normalized", norm}};
}

json to_json(const PipelineReport& r) {
  json j;
  for (int c = 0; c < 4; ++c) {
    const std::string name(to_string(static_cast<TokenClass>(c)));
    if (r.counts[c].present()) {
      j[name] = to_json(r.per_class[c]);
    } else {
      j[name] = {{"precision", nullptr}, {"recall", nullptr}, {"f1", nullptr}};
    }
  }
  j["confusion"] = to_json(r.confusion);
  return j;
}

namespace {

void flatten(std::ostream& out, const json& j, const std::string& prefix) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      flatten(out, it.value(), prefix.empty() ? it.key() : prefix + "." + it.key());
    }
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      flatten(out, j[i], prefix + "." + std::to_string(i));
    }
  } else if (j.is_string()) {
    out << prefix << ',' << j.get<std::string>() << '\n';
  } else {
    out << prefix << ',' << j.dump() << '\n';
  }
}

}  // namespace

void write_metrics_csv(std::ostream& out, const json& report) {
  out << "metric,value\n";
  flatten(out, report, "");
}

}  // namespace substan
