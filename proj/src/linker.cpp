#include "substan/linker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "model_common.hpp"
#include "substan/errors.hpp"
#include "substan/metrics.hpp"

namespace substan {

using nlohmann::json;

void LinkerConfig::validate() const {
  training.validate();
  if (stride < 1) throw UsageError("stride must be >= 1");
  if (max_answer_len < 1) throw UsageError("max_answer_len must be >= 1");
}

json to_json(const LinkerConfig& c) {
  json j = to_json(c.training);
  j["stride"] = c.stride;
  j["max_answer_len"] = c.max_answer_len;
  j["null_bias"] = c.null_bias;
  return j;
}

LinkerConfig linker_config_from_json(const json& j) {
  if (!j.is_object()) throw UsageError("linker config must be a JSON object");
  LinkerConfig c;
  json rest = j;
  try {
    if (rest.contains("stride")) c.stride = rest.at("stride").get<int>();
    if (rest.contains("max_answer_len")) c.max_answer_len = rest.at("max_answer_len").get<int>();
    if (rest.contains("null_bias")) c.null_bias = rest.at("null_bias").get<double>();
  } catch (const json::exception&) {
    throw UsageError("linker config has a field of the wrong type");
  }
  rest.erase("stride");
  rest.erase("max_answer_len");
  rest.erase("null_bias");
  c.training = tagger_config_from_json(rest);
  return c;
}

std::vector<std::string> EvidenceQuery::concatenated() const {
  std::vector<std::string> seq;
  seq.reserve(claim_tokens.size() + review_tokens.size() + 2);
  seq.emplace_back(kClsToken);
  seq.insert(seq.end(), claim_tokens.begin(), claim_tokens.end());
  seq.emplace_back(kSepToken);
  seq.insert(seq.end(), review_tokens.begin(), review_tokens.end());
  return seq;
}

namespace {

EvidenceQuery make_query(const ArgSpan& claim, const TokenAlignment& a,
                         const std::vector<std::string>& review_tokens) {
  const auto [first, last] = a.overlapping(claim.range());
  if (first == last) {
    throw DataError("claim [" + std::to_string(claim.start) + "," + std::to_string(claim.end) +
                    ") covers no token");
  }
  EvidenceQuery q;
  q.claim = claim;
  q.claim_tokens = a.token_strings(first, last);
  q.review_tokens = review_tokens;
  return q;
}

}  // namespace

std::vector<EvidenceQuery> build_queries(const AnnotatedReview& r, const TokenAlignment& a) {
  const auto review_tokens = a.token_strings(0, a.size());
  std::vector<EvidenceQuery> out;
  for (const auto& claim : r.claims()) {
    EvidenceQuery q = make_query(claim, a, review_tokens);
    q.gold = EvidenceAnswer::null();
    if (const auto ev = r.evidence_for(claim)) {
      const auto [first, last] = a.overlapping(ev->range());
      if (first < last) q.gold = EvidenceAnswer::span(first, last - 1);
    }
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<EvidenceQuery> build_queries(const std::vector<ArgSpan>& claims,
                                         const TokenAlignment& a) {
  const auto review_tokens = a.token_strings(0, a.size());
  std::vector<EvidenceQuery> out;
  for (const auto& claim : claims) {
    if (is_claim(claim.type)) out.push_back(make_query(claim, a, review_tokens));
  }
  return out;
}

EvidenceAnswer select_answer(const std::vector<WindowScores>& windows, std::size_t max_answer_len,
                             double null_bias) {
  std::optional<EvidenceAnswer> best;
  for (const auto& w : windows) {
    const std::size_t n = w.start.size();
    double best_span = -std::numeric_limits<double>::infinity();
    std::size_t bs = 0, be = 0;
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t limit = std::min(n, s + max_answer_len);
      for (std::size_t e = s; e < limit; ++e) {
        const double score = static_cast<double>(w.start[s]) + w.end[e];
        if (score > best_span) {
          best_span = score;
          bs = s;
          be = e;
        }
      }
    }
    const double null_score = static_cast<double>(w.null_start) + w.null_end + null_bias;
    EvidenceAnswer cand = (n > 0 && !(null_score > best_span))
                              ? EvidenceAnswer::span(w.window.begin + bs, w.window.begin + be,
                                                     best_span)
                              : EvidenceAnswer::null(null_score);
    if (!best || cand.score > best->score ||
        (cand.score == best->score && best->is_null() && !cand.is_null())) {
      best = cand;
    }
  }
  return best.value_or(EvidenceAnswer::null());
}

std::vector<Chunk> query_windows(const EvidenceQuery& q, std::size_t max_len, std::size_t stride) {
  if (q.claim_tokens.size() + 2 >= max_len) {
    throw UsageError("claim of " + std::to_string(q.claim_tokens.size()) +
                     " tokens does not fit the encoder budget of " + std::to_string(max_len));
  }
  const std::size_t window = max_len - q.claim_tokens.size() - 2;
  return make_chunks(q.review_tokens.size(), window, std::min(stride, window));
}

struct LinkerModel::Impl {
  LinkerConfig config;
  std::unique_ptr<Encoder> encoder;
  detail::Linear head;  // outputs [start, end]
  TrainingLog log;

  std::vector<nn::Param*> params() {
    auto p = encoder->params();
    p.push_back(&head.weight);
    p.push_back(&head.bias);
    return p;
  }
  std::vector<const nn::Param*> params() const {
    auto p = std::as_const(*encoder).params();
    p.push_back(&head.weight);
    p.push_back(&head.bias);
    return p;
  }

  static std::vector<std::string> window_sequence(const EvidenceQuery& q, const Chunk& w) {
    std::vector<std::string> seq;
    seq.reserve(q.claim_tokens.size() + w.size() + 2);
    seq.emplace_back(kClsToken);
    seq.insert(seq.end(), q.claim_tokens.begin(), q.claim_tokens.end());
    seq.emplace_back(kSepToken);
    seq.insert(seq.end(), q.review_tokens.begin() + static_cast<long>(w.begin),
               q.review_tokens.begin() + static_cast<long>(w.end));
    return seq;
  }
};

LinkerModel::LinkerModel(LinkerConfig config, std::unique_ptr<Encoder> encoder)
    : impl_(std::make_unique<Impl>()) {
  std::mt19937_64 rng(config.training.seed + 2);
  impl_->head = detail::Linear("span_head", encoder->dim(), 2, rng);
  impl_->config = std::move(config);
  impl_->encoder = std::move(encoder);
}

LinkerModel::LinkerModel(LinkerModel&&) noexcept = default;
LinkerModel& LinkerModel::operator=(LinkerModel&&) noexcept = default;
LinkerModel::~LinkerModel() = default;

const LinkerConfig& LinkerModel::config() const { return impl_->config; }
const TrainingLog& LinkerModel::training_log() const { return impl_->log; }

WindowScores LinkerModel::score_window(const EvidenceQuery& q, const Chunk& window) const {
  const auto x = impl_->encoder->featurize(Impl::window_sequence(q, window));
  const nn::Matrix logits = impl_->head.forward(impl_->encoder->forward(x, nullptr));
  WindowScores w;
  w.window = window;
  w.null_start = logits(0, 0);
  w.null_end = logits(0, 1);
  const std::size_t off = q.claim_tokens.size() + 2;
  for (std::size_t i = 0; i < window.size(); ++i) {
    w.start.push_back(logits(off + i, 0));
    w.end.push_back(logits(off + i, 1));
  }
  return w;
}

void LinkerModel::save(const std::filesystem::path& dir) const {
  const json manifest = {{"task", "evidence_linkage"},
                         {"config", to_json(impl_->config)},
                         {"outputs", {"start", "end"}},
                         {"encoder_dim", impl_->encoder->dim()},
                         {"training_log", to_json(impl_->log)}};
  detail::write_artifact(dir, manifest, std::as_const(*impl_).params());
}

LinkerModel LinkerModel::load(const std::filesystem::path& dir, const EncoderBackend& backend) {
  const json manifest = detail::read_manifest(dir);
  if (manifest.value("task", "") != "evidence_linkage") {
    throw DataError(dir.string() + " is not an evidence linkage model");
  }
  LinkerConfig config = linker_config_from_json(manifest.at("config"));
  LinkerModel model(config, backend.create(config.training.encoder_id, config.training.seed));
  detail::read_weights(dir, model.impl_->params());
  return model;
}

EvidenceAnswer predict_evidence(const LinkerModel& model, const EvidenceQuery& q,
                                std::size_t max_len, std::size_t stride,
                                std::size_t max_answer_len) {
  std::vector<WindowScores> scores;
  for (const auto& w : query_windows(q, max_len, stride)) scores.push_back(model.score_window(q, w));
  return select_answer(scores, max_answer_len, model.config().null_bias);
}

EvidenceAnswer predict_evidence(const LinkerModel& model, const EvidenceQuery& q) {
  const auto& c = model.config();
  return predict_evidence(model, q, static_cast<std::size_t>(c.training.max_len),
                          static_cast<std::size_t>(c.stride),
                          static_cast<std::size_t>(c.max_answer_len));
}

std::optional<ArgSpan> answer_to_span(const EvidenceAnswer& answer, const ArgSpan& claim,
                                      const TokenAlignment& a) {
  if (answer.is_null()) return std::nullopt;
  const CharRange r = a.char_range(answer.start_token, answer.end_token + 1);
  return ArgSpan{evidence_type_for(claim.type), r.start, r.end, claim.claim_id};
}

namespace {

struct LinkExample {
  FeatureSequence features;
  std::size_t review_offset = 0;  // first review position in the sequence
  std::size_t window_len = 0;
  std::size_t start_target = 0;   // sequence position; 0 is the null sentinel
  std::size_t end_target = 0;
};

// Softmax cross-entropy over the null sentinel and the review positions of
// one output column. Writes the scaled gradient into grad and returns the loss.
double position_loss(const nn::Matrix& logits, std::size_t column, const LinkExample& ex,
                     float scale, nn::Matrix& grad) {
  std::vector<std::size_t> positions;
  positions.push_back(0);
  for (std::size_t i = 0; i < ex.window_len; ++i) positions.push_back(ex.review_offset + i);
  const std::size_t target = column == 0 ? ex.start_target : ex.end_target;
  std::vector<float> p(positions.size());
  for (std::size_t k = 0; k < positions.size(); ++k) p[k] = logits(positions[k], column);
  nn::softmax(p.data(), p.size());
  double loss = 0.0;
  for (std::size_t k = 0; k < positions.size(); ++k) {
    const bool hit = positions[k] == target;
    if (hit) loss = -std::log(std::max(p[k], 1e-12f));
    grad(positions[k], column) = scale * (p[k] - (hit ? 1.0f : 0.0f));
  }
  return loss;
}

}  // namespace

LinkerModel train_linker(const std::vector<AnnotatedReview>& train_corpus,
                         const LinkerConfig& config, const EncoderBackend& backend) {
  if (train_corpus.empty()) throw UsageError("cannot train a linker on an empty corpus");
  config.validate();
  const TaggerConfig& tc = config.training;
  const Tokenizer tokenizer = tokenizer_by_name(tc.tokenizer);
  LinkerModel model(config, backend.create(tc.encoder_id, tc.seed));
  auto& impl = *model.impl_;
  const auto max_len = static_cast<std::size_t>(tc.max_len);
  const auto stride = static_cast<std::size_t>(config.stride);

  const auto [train_idx, val_idx] =
      detail::validation_split(train_corpus.size(), tc.validation_fraction, tc.seed);

  std::vector<LinkExample> examples;
  for (auto idx : train_idx) {
    const auto a = align_tokens(train_corpus[idx].review.text, tokenizer);
    for (const auto& q : build_queries(train_corpus[idx], a)) {
      if (q.claim_tokens.size() + 2 >= max_len) continue;  // cannot be encoded
      for (const auto& w : query_windows(q, max_len, stride)) {
        LinkExample ex;
        ex.features = impl.encoder->featurize(LinkerModel::Impl::window_sequence(q, w));
        ex.review_offset = q.claim_tokens.size() + 2;
        ex.window_len = w.size();
        const auto& g = *q.gold;
        if (!g.is_null() && g.start_token >= w.begin && g.end_token < w.end) {
          ex.start_target = ex.review_offset + g.start_token - w.begin;
          ex.end_target = ex.review_offset + g.end_token - w.begin;
        }
        examples.push_back(std::move(ex));
      }
    }
  }

  const detail::StepFn step = [&](std::span<const std::size_t> batch) {
    detail::BatchLoss loss;
    const float scale = 1.0f / static_cast<float>(batch.size());
    for (auto i : batch) {
      const auto& ex = examples[i];
      EncoderTrace trace;
      const nn::Matrix h = impl.encoder->forward(ex.features, &trace);
      const nn::Matrix logits = impl.head.forward(h);
      nn::Matrix grad(logits.rows, logits.cols);
      loss.loss_sum += position_loss(logits, 0, ex, scale, grad);
      loss.loss_sum += position_loss(logits, 1, ex, scale, grad);
      loss.weight += 1.0;
      impl.encoder->backward(ex.features, trace, impl.head.backward(h, grad));
    }
    return loss;
  };

  const detail::ValidateFn validate = [&, &val_idx = val_idx]() -> std::optional<double> {
    if (val_idx.empty()) return std::nullopt;
    EvidenceScorer scorer;
    for (auto i : val_idx) {
      const auto a = align_tokens(train_corpus[i].review.text, tokenizer);
      for (const auto& q : build_queries(train_corpus[i], a)) {
        if (q.claim_tokens.size() + 2 >= max_len) continue;
        scorer.add(*q.gold, predict_evidence(model, q));
      }
    }
    if (scorer.count() == 0) return std::nullopt;
    return scorer.mean().exact_match;
  };

  impl.log = detail::run_training(examples.size(), tc, impl.params(), step, validate);
  return model;
}

EvidenceScore evaluate_linkage(const LinkerModel& model, const std::vector<AnnotatedReview>& gold) {
  const Tokenizer tokenizer = tokenizer_by_name(model.config().training.tokenizer);
  EvidenceScorer scorer;
  for (const auto& r : gold) {
    const auto a = align_tokens(r.review.text, tokenizer);
    for (const auto& q : build_queries(r, a)) scorer.add(*q.gold, predict_evidence(model, q));
  }
  return scorer.mean();
}

}  // namespace substan
