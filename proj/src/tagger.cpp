#include "substan/tagger.hpp"

#include <algorithm>
#include <array>
#include <utility>
#include <cmath>

#include "model_common.hpp"
#include "substan/errors.hpp"
#include "substan/metrics.hpp"

namespace substan {

using nlohmann::json;

void TaggerConfig::validate() const {
  if (encoder_id.empty()) throw UsageError("encoder_id must be set");
  if (batch_size < 1) throw UsageError("batch_size must be >= 1");
  if (max_epochs < 1) throw UsageError("max_epochs must be >= 1");
  if (weight_decay < 0.0) throw UsageError("weight_decay must be >= 0");
  if (max_len < 8) throw UsageError("max_len must be >= 8");
  if (!(learning_rate > 0.0)) throw UsageError("learning_rate must be positive");
  if (validation_fraction < 0.0 || validation_fraction >= 1.0) {
    throw UsageError("validation_fraction must lie in [0, 1)");
  }
  tokenizer_by_name(tokenizer);
}

json to_json(const TaggerConfig& c) {
  return {{"encoder_id", c.encoder_id},
          {"tokenizer", c.tokenizer},
          {"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size},
          {"max_epochs", c.max_epochs},
          {"weight_decay", c.weight_decay},
          {"early_stop_patience", c.early_stop_patience},
          {"seed", c.seed},
          {"max_len", c.max_len},
          {"validation_fraction", c.validation_fraction},
          {"class_weights", c.class_weights}};
}

TaggerConfig tagger_config_from_json(const json& j) {
  TaggerConfig c;
  if (!j.is_object()) throw UsageError("tagger config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    const auto& v = it.value();
    try {
      if (k == "encoder_id") c.encoder_id = v.get<std::string>();
      else if (k == "tokenizer") c.tokenizer = v.get<std::string>();
      else if (k == "learning_rate") c.learning_rate = v.get<double>();
      else if (k == "batch_size") c.batch_size = v.get<int>();
      else if (k == "max_epochs") c.max_epochs = v.get<int>();
      else if (k == "weight_decay") c.weight_decay = v.get<double>();
      else if (k == "early_stop_patience") c.early_stop_patience = v.get<int>();
      else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else if (k == "max_len") c.max_len = v.get<int>();
      else if (k == "validation_fraction") c.validation_fraction = v.get<double>();
      else if (k == "class_weights") c.class_weights = v.get<bool>();
      else throw UsageError("unknown config key '" + k + "'");
    } catch (const json::exception&) {
      throw UsageError("config key '" + k + "' has the wrong type");
    }
  }
  return c;
}

Tokenizer tokenizer_by_name(const std::string& name) {
  if (name == "word_punct") return word_punct_tokenize;
  if (name == "whitespace") return whitespace_tokenize;
  throw UsageError("unknown tokenizer '" + name + "'");
}

json to_json(const TrainingLog& log) {
  json epochs = json::array();
  for (const auto& e : log.epochs) {
    json r = {{"epoch", e.epoch}, {"train_loss", e.train_loss}};
    r["validation_score"] = e.validation_score ? json(*e.validation_score) : json(nullptr);
    epochs.push_back(r);
  }
  return {{"epochs", epochs}, {"best_epoch", log.best_epoch}, {"stopped_early", log.stopped_early}};
}

struct TaggerModel::Impl {
  TaggerConfig config;
  std::unique_ptr<Encoder> encoder;
  detail::Linear head;
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

  static std::vector<std::string> with_sentinels(const std::vector<std::string>& tokens) {
    std::vector<std::string> seq;
    seq.reserve(tokens.size() + 2);
    seq.emplace_back(kClsToken);
    seq.insert(seq.end(), tokens.begin(), tokens.end());
    seq.emplace_back(kSepToken);
    return seq;
  }
};

TaggerModel::TaggerModel(TaggerConfig config, std::unique_ptr<Encoder> encoder)
    : impl_(std::make_unique<Impl>()) {
  std::mt19937_64 rng(config.seed + 1);
  impl_->head = detail::Linear("tag_head", encoder->dim(), kNumBioLabels, rng);
  impl_->config = std::move(config);
  impl_->encoder = std::move(encoder);
}

TaggerModel::TaggerModel(TaggerModel&&) noexcept = default;
TaggerModel& TaggerModel::operator=(TaggerModel&&) noexcept = default;
TaggerModel::~TaggerModel() = default;

const TaggerConfig& TaggerModel::config() const { return impl_->config; }
const TrainingLog& TaggerModel::training_log() const { return impl_->log; }

nn::Matrix TaggerModel::score(const std::vector<std::string>& tokens) const {
  const auto x = impl_->encoder->featurize(Impl::with_sentinels(tokens));
  const nn::Matrix h = impl_->encoder->forward(x, nullptr);
  const nn::Matrix logits = impl_->head.forward(h);
  nn::Matrix out(tokens.size(), kNumBioLabels);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::copy_n(logits.row(i + 1), kNumBioLabels, out.row(i));
  }
  return out;
}

LabelSequence TaggerModel::label(const TokenAlignment& a) const {
  LabelSequence labels;
  labels.reserve(a.size());
  const auto chunk_len = static_cast<std::size_t>(impl_->config.max_len - 2);
  for (const auto& chunk : make_chunks(a.size(), chunk_len)) {
    const nn::Matrix s = score(a.token_strings(chunk.begin, chunk.end));
    for (std::size_t i = 0; i < s.rows; ++i) {
      const float* row = s.row(i);
      // max_element returns the first maximum: ties go to the lowest class.
      const auto best = std::max_element(row, row + kNumBioLabels) - row;
      labels.push_back(static_cast<BioLabel>(best));
    }
  }
  return labels;
}

void TaggerModel::save(const std::filesystem::path& dir) const {
  json classes = json::array();
  for (int i = 0; i < kNumBioLabels; ++i) classes.push_back(to_string(static_cast<BioLabel>(i)));
  const json manifest = {{"task", "claim_tagging"},
                         {"config", to_json(impl_->config)},
                         {"classes", classes},
                         {"encoder_dim", impl_->encoder->dim()},
                         {"training_log", to_json(impl_->log)}};
  detail::write_artifact(dir, manifest, std::as_const(*impl_).params());
}

TaggerModel TaggerModel::load(const std::filesystem::path& dir, const EncoderBackend& backend) {
  const json manifest = detail::read_manifest(dir);
  if (manifest.value("task", "") != "claim_tagging") {
    throw DataError(dir.string() + " is not a claim tagging model");
  }
  const json& classes = manifest.at("classes");
  for (int i = 0; i < kNumBioLabels; ++i) {
    if (classes.at(i).get<std::string>() != to_string(static_cast<BioLabel>(i))) {
      throw DataError("model class ordering differs from this build");
    }
  }
  TaggerConfig config = tagger_config_from_json(manifest.at("config"));
  TaggerModel model(config, backend.create(config.encoder_id, config.seed));
  detail::read_weights(dir, model.impl_->params());
  return model;
}

namespace {

struct TagExample {
  FeatureSequence features;  // with sentinels
  std::vector<int> labels;   // per inner token
};

std::vector<TagExample> make_examples(const Encoder& encoder,
                                      const std::vector<AnnotatedReview>& corpus,
                                      const std::vector<std::size_t>& indices,
                                      const TaggerConfig& config, const Tokenizer& tokenizer) {
  std::vector<TagExample> out;
  const auto chunk_len = static_cast<std::size_t>(config.max_len - 2);
  for (auto idx : indices) {
    const auto& r = corpus[idx];
    const auto a = align_tokens(r.review.text, tokenizer);
    const auto enc = encode_bio(r, a);
    for (const auto& chunk : make_chunks(a.size(), chunk_len)) {
      std::vector<std::string> seq;
      seq.emplace_back(kClsToken);
      for (std::size_t t = chunk.begin; t < chunk.end; ++t) seq.push_back(utf8_encode(a.tokens[t]));
      seq.emplace_back(kSepToken);
      TagExample ex;
      ex.features = encoder.featurize(seq);
      for (std::size_t t = chunk.begin; t < chunk.end; ++t) {
        ex.labels.push_back(static_cast<int>(enc.labels[t]));
      }
      out.push_back(std::move(ex));
    }
  }
  return out;
}

}  // namespace

TaggerModel train_tagger(const std::vector<AnnotatedReview>& train_corpus,
                         const TaggerConfig& config, const EncoderBackend& backend) {
  if (train_corpus.empty()) throw UsageError("cannot train a tagger on an empty corpus");
  config.validate();
  const Tokenizer tokenizer = tokenizer_by_name(config.tokenizer);
  TaggerModel model(config, backend.create(config.encoder_id, config.seed));
  auto& impl = *model.impl_;

  const auto [train_idx, val_idx] =
      detail::validation_split(train_corpus.size(), config.validation_fraction, config.seed);
  const auto examples = make_examples(*impl.encoder, train_corpus, train_idx, config, tokenizer);

  std::array<double, kNumBioLabels> weights;
  weights.fill(1.0);
  if (config.class_weights) {
    std::array<double, kNumBioLabels> counts{};
    double total = 0.0;
    for (const auto& ex : examples) {
      for (int l : ex.labels) {
        counts[l] += 1.0;
        total += 1.0;
      }
    }
    for (int c = 0; c < kNumBioLabels; ++c) {
      weights[c] = counts[c] > 0.0 ? total / (kNumBioLabels * counts[c]) : 1.0;
    }
  }

  const detail::StepFn step = [&](std::span<const std::size_t> batch) {
    double batch_weight = 0.0;
    for (auto i : batch) {
      for (int l : examples[i].labels) batch_weight += weights[l];
    }
    detail::BatchLoss loss;
    if (batch_weight == 0.0) return loss;
    for (auto i : batch) {
      const auto& ex = examples[i];
      EncoderTrace trace;
      const nn::Matrix h = impl.encoder->forward(ex.features, &trace);
      nn::Matrix probs = impl.head.forward(h);
      nn::Matrix grad(probs.rows, probs.cols);
      for (std::size_t t = 0; t < ex.labels.size(); ++t) {
        float* p = probs.row(t + 1);
        nn::softmax(p, kNumBioLabels);
        const int y = ex.labels[t];
        const double w = weights[y];
        loss.loss_sum -= w * std::log(std::max(p[y], 1e-12f));
        loss.weight += w;
        float* g = grad.row(t + 1);
        for (int c = 0; c < kNumBioLabels; ++c) {
          g[c] = static_cast<float>(w * (p[c] - (c == y ? 1.0f : 0.0f)) / batch_weight);
        }
      }
      const nn::Matrix dh = impl.head.backward(h, grad);
      impl.encoder->backward(ex.features, trace, dh);
    }
    return loss;
  };

  const detail::ValidateFn validate = [&, &val_idx = val_idx]() -> std::optional<double> {
    if (val_idx.empty()) return std::nullopt;
    SpanScorer scorer;
    for (auto i : val_idx) {
      const auto& r = train_corpus[i];
      const auto a = align_tokens(r.review.text, tokenizer);
      scorer.add(snap_to_tokens(r.claims(), a), decode_bio(model.label(a), a));
    }
    return scorer.result().macro.f1;
  };

  impl.log = detail::run_training(examples.size(), config, impl.params(), step, validate);
  return model;
}

std::vector<ArgSpan> predict_claims(const TaggerModel& model, const Review& review,
                                    const Tokenizer& tokenizer) {
  const auto a = align_tokens(review.text, tokenizer);
  if (a.empty()) return {};
  return decode_bio(model.label(a), a);
}

std::vector<ArgSpan> predict_claims(const TaggerModel& model, const Review& review) {
  return predict_claims(model, review, tokenizer_by_name(model.config().tokenizer));
}

}  // namespace substan
