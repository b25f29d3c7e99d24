#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "substan/nn.hpp"

namespace substan {

inline constexpr std::string_view kClsToken = "[CLS]";
inline constexpr std::string_view kSepToken = "[SEP]";

// Raised when a backend cannot instantiate an encoder id.
class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Per-token sparse feature ids produced by Encoder::featurize.
struct FeatureSequence {
  std::vector<std::vector<std::uint32_t>> features;
  std::size_t size() const { return features.size(); }
};

// Activations kept by a forward pass for the matching backward pass.
struct EncoderTrace {
  std::vector<nn::Matrix> activations;
};

// A trainable text encoder mapping a token sequence to one vector per token.
// Sequences of the form [CLS] a... [SEP] b... are treated as text pairs.
// forward() is const and keeps no state outside the trace, so one encoder
// can score from several threads at once.
class Encoder {
 public:
  virtual ~Encoder() = default;

  virtual const std::string& id() const = 0;
  virtual std::size_t dim() const = 0;
  virtual FeatureSequence featurize(const std::vector<std::string>& tokens) const = 0;
  virtual nn::Matrix forward(const FeatureSequence& x, EncoderTrace* trace) const = 0;
  // Accumulates parameter gradients for d(loss)/d(output) = grad_out.
  virtual void backward(const FeatureSequence& x, const EncoderTrace& trace,
                        const nn::Matrix& grad_out) = 0;
  virtual std::vector<nn::Param*> params() = 0;
  virtual std::vector<const nn::Param*> params() const = 0;
};

class EncoderBackend {
 public:
  virtual ~EncoderBackend() = default;
  // Throws BackendError for ids the backend does not know.
  virtual std::unique_ptr<Encoder> create(const std::string& encoder_id,
                                          std::uint64_t seed) const = 0;
  // True when a single model may be scored concurrently; otherwise callers
  // must load one model per worker.
  virtual bool shareable_for_scoring() const = 0;
};

// Hashed lexical features summed into an embedding, followed by a stack of
// width-3 residual convolutions with dilation 1, 2, 4, ...
// Ids: "hashconv" (d32, b17, 3 layers) or "hashconv-d<dim>-b<log2 buckets>[-l<layers>]".
class HashConvBackend : public EncoderBackend {
 public:
  std::unique_ptr<Encoder> create(const std::string& encoder_id,
                                  std::uint64_t seed) const override;
  bool shareable_for_scoring() const override { return true; }
};

const EncoderBackend& default_backend();

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ULL);

}  // namespace substan
