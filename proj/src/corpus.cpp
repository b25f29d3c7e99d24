#include "substan/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "substan/errors.hpp"
#include "substan/random.hpp"

namespace substan {

using nlohmann::json;

std::string_view to_string(SpanType t) {
  switch (t) {
    case SpanType::kClaimPos: return "claim_pos";
    case SpanType::kClaimNeg: return "claim_neg";
    case SpanType::kEvidencePos: return "evidence_pos";
    case SpanType::kEvidenceNeg: return "evidence_neg";
  }
  return "?";
}

SpanType span_type_from_string(std::string_view name) {
  if (name == "claim_pos") return SpanType::kClaimPos;
  if (name == "claim_neg") return SpanType::kClaimNeg;
  if (name == "evidence_pos") return SpanType::kEvidencePos;
  if (name == "evidence_neg") return SpanType::kEvidenceNeg;
  throw DataError("unknown span type '" + std::string(name) + "'");
}

std::vector<ArgSpan> AnnotatedReview::claims() const {
  std::vector<ArgSpan> out;
  for (const auto& s : spans) {
    if (is_claim(s.type)) out.push_back(s);
  }
  return out;
}

std::vector<ArgSpan> AnnotatedReview::evidence() const {
  std::vector<ArgSpan> out;
  for (const auto& s : spans) {
    if (!is_claim(s.type)) out.push_back(s);
  }
  return out;
}

std::optional<ArgSpan> AnnotatedReview::evidence_for(const ArgSpan& claim) const {
  const SpanType wanted = evidence_type_for(claim.type);
  for (const auto& s : spans) {
    if (s.type == wanted && s.claim_id == claim.claim_id) return s;
  }
  return std::nullopt;
}

namespace {

void add(std::vector<Violation>& out, std::optional<std::size_t> index, std::string rule,
         std::string message) {
  out.push_back({index, std::move(rule), std::move(message)});
}

std::string span_desc(const ArgSpan& s) {
  std::ostringstream os;
  os << to_string(s.type) << "[" << s.start << "," << s.end << ") claim_id=" << s.claim_id;
  return os.str();
}

void check_pairwise_overlap(const std::vector<ArgSpan>& spans, bool claims,
                            std::vector<Violation>& out) {
  const char* rule = claims ? "claim-overlap" : "evidence-overlap";
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (is_claim(spans[i].type) != claims) continue;
    for (std::size_t j = i + 1; j < spans.size(); ++j) {
      if (is_claim(spans[j].type) != claims) continue;
      if (spans[i].range().overlaps(spans[j].range())) {
        add(out, j, rule,
            span_desc(spans[j]) + " overlaps span " + std::to_string(i) + " " +
                span_desc(spans[i]));
      }
    }
  }
}

}  // namespace

std::vector<Violation> validate_review(const AnnotatedReview& r, RatingRange ratings) {
  std::vector<Violation> out;
  if (r.review.id.empty()) add(out, std::nullopt, "empty-id", "review id is empty");
  if (r.review.text.empty()) add(out, std::nullopt, "empty-text", "review text is empty");
  for (const auto& [name, value] : {std::pair{"human_substantiation", r.review.human_substantiation},
                                    std::pair{"human_difficulty", r.review.human_difficulty}}) {
    if (value && (*value < ratings.min || *value > ratings.max)) {
      add(out, std::nullopt, "rating-range",
          std::string(name) + "=" + std::to_string(*value) + " outside [" +
              std::to_string(ratings.min) + "," + std::to_string(ratings.max) + "]");
    }
  }

  const auto& spans = r.spans;
  const std::size_t len = r.review.text.size();
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto& s = spans[i];
    if (!(s.start < s.end && s.end <= len)) {
      add(out, i, "bounds",
          span_desc(s) + " violates 0 <= start < end <= " + std::to_string(len));
    }
    if (i > 0 && spans[i - 1].start > s.start) {
      add(out, i, "unsorted", span_desc(s) + " starts before the preceding span");
    }
  }
  check_pairwise_overlap(spans, true, out);
  check_pairwise_overlap(spans, false, out);

  // Claims keyed by (polarity, claim_id).
  std::map<std::pair<bool, int>, std::size_t> claim_index;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (!is_claim(spans[i].type)) continue;
    const auto key = std::pair{is_positive(spans[i].type), spans[i].claim_id};
    if (!claim_index.emplace(key, i).second) {
      add(out, i, "duplicate-claim-id",
          span_desc(spans[i]) + " reuses the id of span " + std::to_string(claim_index[key]));
    }
  }
  std::map<std::pair<bool, int>, std::size_t> evidence_index;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto& s = spans[i];
    if (is_claim(s.type)) continue;
    const bool pos = is_positive(s.type);
    if (!claim_index.count({pos, s.claim_id})) {
      if (claim_index.count({!pos, s.claim_id})) {
        add(out, i, "polarity-mismatch",
            span_desc(s) + " links to a claim of the opposite polarity");
      } else {
        add(out, i, "dangling-claim-id", span_desc(s) + " links to no existing claim");
      }
      continue;
    }
    if (!evidence_index.emplace(std::pair{pos, s.claim_id}, i).second) {
      add(out, i, "multiple-evidence",
          span_desc(s) + " is a second evidence span for one claim (first is span " +
              std::to_string(evidence_index[{pos, s.claim_id}]) + ")");
    }
  }
  return out;
}

std::string describe(const Violation& v) {
  std::string out = v.rule;
  if (v.span_index) out += " (span " + std::to_string(*v.span_index) + ")";
  return out + ": " + v.message;
}

json to_json(const AnnotatedReview& r) {
  json spans = json::array();
  for (const auto& s : r.spans) {
    spans.push_back({{"type", to_string(s.type)},
                     {"start", s.start},
                     {"end", s.end},
                     {"claim_id", s.claim_id}});
  }
  json j = {{"id", r.review.id},
            {"venue", r.review.venue},
            {"year", r.review.year},
            {"text", utf8_encode(r.review.text)},
            {"spans", std::move(spans)}};
  if (r.review.human_substantiation) j["human_substantiation"] = *r.review.human_substantiation;
  if (r.review.human_difficulty) j["human_difficulty"] = *r.review.human_difficulty;
  if (r.review.annotator_id) j["annotator_id"] = *r.review.annotator_id;
  return j;
}

namespace {

template <typename T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) throw DataError(std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw DataError(std::string("key '") + key + "' has the wrong type");
  }
}

std::optional<int> optional_int(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_number_integer()) {
    throw DataError(std::string("key '") + key + "' must be an integer");
  }
  return j.at(key).get<int>();
}

}  // namespace

AnnotatedReview review_from_json(const json& j) {
  if (!j.is_object()) throw DataError("record is not a JSON object");
  AnnotatedReview r;
  r.review.id = required<std::string>(j, "id");
  r.review.venue = required<std::string>(j, "venue");
  r.review.year = required<int>(j, "year");
  r.review.text = utf8_decode(required<std::string>(j, "text"));
  r.review.human_substantiation = optional_int(j, "human_substantiation");
  r.review.human_difficulty = optional_int(j, "human_difficulty");
  if (j.contains("annotator_id") && !j.at("annotator_id").is_null()) {
    r.review.annotator_id = required<std::string>(j, "annotator_id");
  }
  const json spans = j.contains("spans") ? j.at("spans") : json::array();
  if (!spans.is_array()) throw DataError("key 'spans' must be an array");
  for (const auto& s : spans) {
    ArgSpan span;
    span.type = span_type_from_string(required<std::string>(s, "type"));
    const auto start = required<std::int64_t>(s, "start");
    const auto end = required<std::int64_t>(s, "end");
    if (start < 0 || end < 0) throw DataError("negative span offset");
    span.start = static_cast<std::size_t>(start);
    span.end = static_cast<std::size_t>(end);
    span.claim_id = required<int>(s, "claim_id");
    r.spans.push_back(span);
  }
  std::stable_sort(r.spans.begin(), r.spans.end(),
                   [](const ArgSpan& a, const ArgSpan& b) { return a.start < b.start; });
  return r;
}

std::vector<AnnotatedReview> read_corpus(std::istream& in, const LoadOptions& options) {
  std::vector<AnnotatedReview> corpus;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(where + ": malformed JSON: " + e.what());
    }
    AnnotatedReview r;
    try {
      r = review_from_json(j);
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
    const std::string rec = where + " (record '" + r.review.id + "')";
    if (!ids.insert(r.review.id).second) {
      throw DataError(rec + ": duplicate review id");
    }
    const auto violations = validate_review(r, options.ratings);
    if (!violations.empty()) {
      std::string msg = rec + ": ";
      for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i) msg += "; ";
        msg += describe(violations[i]);
      }
      throw DataError(msg);
    }
    corpus.push_back(std::move(r));
  }
  return corpus;
}

std::vector<AnnotatedReview> load_corpus(const std::filesystem::path& path,
                                         const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file " + path.string());
  try {
    return read_corpus(in, options);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_corpus(std::ostream& out, const std::vector<AnnotatedReview>& corpus) {
  for (const auto& r : corpus) out << to_json(r).dump() << '\n';
}

void save_corpus(const std::filesystem::path& path, const std::vector<AnnotatedReview>& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write corpus file " + path.string());
  write_corpus(out, corpus);
}

CorpusSplit split_corpus(const std::vector<AnnotatedReview>& corpus, double test_fraction,
                         std::uint64_t seed) {
  if (corpus.empty()) throw UsageError("cannot split an empty corpus");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw UsageError("test fraction must lie strictly between 0 and 1");
  }
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * corpus.size()));
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  shuffle_in_place(order, rng);
  std::vector<bool> in_test(corpus.size(), false);
  for (std::size_t i = 0; i < n_test; ++i) in_test[order[i]] = true;

  CorpusSplit split;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    (in_test[i] ? split.test : split.train).push_back(corpus[i]);
  }
  return split;
}

}  // namespace substan
