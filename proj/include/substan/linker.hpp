#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "substan/answer.hpp"
#include "substan/corpus.hpp"
#include "substan/encoder.hpp"
#include "substan/metrics.hpp"
#include "substan/spans.hpp"
#include "substan/tagger.hpp"

namespace substan {

struct LinkerConfig {
  TaggerConfig training;
  int stride = 128;           // window step over review tokens
  int max_answer_len = 200;   // tokens
  double null_bias = 0.0;     // added to the null score before comparison

  void validate() const;
};

nlohmann::json to_json(const LinkerConfig& c);
LinkerConfig linker_config_from_json(const nlohmann::json& j);

// One claim paired with the full review: [CLS] claim [SEP] review.
struct EvidenceQuery {
  ArgSpan claim;
  std::vector<std::string> claim_tokens;
  std::vector<std::string> review_tokens;
  std::optional<EvidenceAnswer> gold;  // present for training/evaluation data

  std::vector<std::string> concatenated() const;
};

// One query per claim, in claim order. Gold answers come from the linked
// evidence span (null when the claim is unsupported). Throws DataError for a
// claim that covers no token.
std::vector<EvidenceQuery> build_queries(const AnnotatedReview& r, const TokenAlignment& a);
// Queries for predicted claims, without gold answers.
std::vector<EvidenceQuery> build_queries(const std::vector<ArgSpan>& claims,
                                         const TokenAlignment& a);

// Start/end scores of one window over review tokens [window.begin, window.end).
struct WindowScores {
  Chunk window;
  std::vector<float> start;  // one per review token in the window
  std::vector<float> end;
  float null_start = 0.0f;   // sentinel position
  float null_end = 0.0f;
};

// Best (start, end) per window with start <= end and end - start <
// max_answer_len, compared against that window's null score; the highest
// scoring candidate over all windows wins. Ties prefer a span over null,
// then the earlier window. Indices are in review coordinates.
EvidenceAnswer select_answer(const std::vector<WindowScores>& windows, std::size_t max_answer_len,
                             double null_bias = 0.0);

class LinkerModel {
 public:
  LinkerModel(LinkerConfig config, std::unique_ptr<Encoder> encoder);
  LinkerModel(LinkerModel&&) noexcept;
  LinkerModel& operator=(LinkerModel&&) noexcept;
  ~LinkerModel();

  // Start/end scores for every review position of one window.
  WindowScores score_window(const EvidenceQuery& q, const Chunk& window) const;

  const LinkerConfig& config() const;
  const TrainingLog& training_log() const;

  void save(const std::filesystem::path& dir) const;
  static LinkerModel load(const std::filesystem::path& dir,
                          const EncoderBackend& backend = default_backend());

  struct Impl;

 private:
  friend LinkerModel train_linker(const std::vector<AnnotatedReview>&, const LinkerConfig&,
                                  const EncoderBackend&);
  std::unique_ptr<Impl> impl_;
};

// Review windows for a query: max_len - |claim| - 2 tokens each, advancing
// by min(stride, window length). Throws UsageError when the claim does not
// fit in max_len with its sentinels.
std::vector<Chunk> query_windows(const EvidenceQuery& q, std::size_t max_len, std::size_t stride);

// Trained on gold claims; loss is the sum of start and end cross-entropy.
LinkerModel train_linker(const std::vector<AnnotatedReview>& train_corpus,
                         const LinkerConfig& config,
                         const EncoderBackend& backend = default_backend());

EvidenceAnswer predict_evidence(const LinkerModel& model, const EvidenceQuery& q,
                                std::size_t max_len, std::size_t stride,
                                std::size_t max_answer_len);
// Window and answer limits from the model config.
EvidenceAnswer predict_evidence(const LinkerModel& model, const EvidenceQuery& q);

// Mean evidence EM/F1 of the linker's answers to the gold claims of a corpus.
EvidenceScore evaluate_linkage(const LinkerModel& model, const std::vector<AnnotatedReview>& gold);

// Evidence span for an answer; polarity and claim_id come from the claim.
std::optional<ArgSpan> answer_to_span(const EvidenceAnswer& answer, const ArgSpan& claim,
                                      const TokenAlignment& a);

}  // namespace substan
