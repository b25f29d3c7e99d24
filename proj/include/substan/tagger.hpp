#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "substan/corpus.hpp"
#include "substan/encoder.hpp"
#include "substan/nn.hpp"
#include "substan/spans.hpp"

namespace substan {

// Hyperparameters shared by the claim tagger and the evidence linker.
struct TaggerConfig {
  std::string encoder_id = "hashconv";
  std::string tokenizer = "word_punct";
  double learning_rate = 0.01;
  int batch_size = 8;
  int max_epochs = 10;
  double weight_decay = 0.01;
  int early_stop_patience = 3;  // <= 0 disables early stopping
  std::uint64_t seed = 42;
  int max_len = 512;  // full encoder budget, sentinels included
  // Fraction of training reviews held out for early stopping; 0 trains on
  // everything and keeps the last epoch.
  double validation_fraction = 0.1;
  bool class_weights = false;  // inverse-frequency label weights

  // Throws UsageError naming the first violated bound.
  void validate() const;
};

nlohmann::json to_json(const TaggerConfig& c);
// Missing keys keep their defaults; unknown keys are rejected.
TaggerConfig tagger_config_from_json(const nlohmann::json& j);

// Tokenizer registry: "word_punct" or "whitespace".
Tokenizer tokenizer_by_name(const std::string& name);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  std::optional<double> validation_score;
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  bool stopped_early = false;
};

nlohmann::json to_json(const TrainingLog& log);

class TaggerModel {
 public:
  TaggerModel(TaggerConfig config, std::unique_ptr<Encoder> encoder);
  TaggerModel(TaggerModel&&) noexcept;
  TaggerModel& operator=(TaggerModel&&) noexcept;
  ~TaggerModel();

  // Class scores for one chunk of tokens (sentinels are added internally);
  // one row per input token, columns in BioLabel order.
  nn::Matrix score(const std::vector<std::string>& tokens) const;

  // Non-overlapping chunks of max_len - 2 tokens, scored independently,
  // argmax per token (ties to the lowest class index), concatenated.
  LabelSequence label(const TokenAlignment& a) const;

  const TaggerConfig& config() const;
  const TrainingLog& training_log() const;

  // Writes config.json and weights.bin under dir.
  void save(const std::filesystem::path& dir) const;
  static TaggerModel load(const std::filesystem::path& dir,
                          const EncoderBackend& backend = default_backend());

  struct Impl;

 private:
  friend TaggerModel train_tagger(const std::vector<AnnotatedReview>&, const TaggerConfig&,
                                  const EncoderBackend&);
  std::unique_ptr<Impl> impl_;
};

// Throws UsageError on an empty corpus or invalid config, BackendError when
// the backend cannot create the encoder.
TaggerModel train_tagger(const std::vector<AnnotatedReview>& train_corpus,
                         const TaggerConfig& config,
                         const EncoderBackend& backend = default_backend());

// align -> chunk -> score -> argmax -> decode.
std::vector<ArgSpan> predict_claims(const TaggerModel& model, const Review& review,
                                    const Tokenizer& tokenizer);
// Uses the tokenizer recorded in the model config.
std::vector<ArgSpan> predict_claims(const TaggerModel& model, const Review& review);

}  // namespace substan
