#pragma once

// Internals shared by the tagger and the linker: a linear output head, the
// epoch/batch training loop with early stopping, and artifact I/O.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "json.hpp"

#include "substan/nn.hpp"
#include "substan/tagger.hpp"

namespace substan::detail {

struct Linear {
  std::size_t in = 0;
  std::size_t out = 0;
  nn::Param weight;  // out x in
  nn::Param bias;

  Linear() = default;
  Linear(const std::string& name, std::size_t in_dim, std::size_t out_dim, std::mt19937_64& rng);

  nn::Matrix forward(const nn::Matrix& x) const;
  // Accumulates weight gradients and returns d(loss)/dx.
  nn::Matrix backward(const nn::Matrix& x, const nn::Matrix& grad_y);
};

struct BatchLoss {
  double loss_sum = 0.0;
  double weight = 0.0;
};

// Computes gradients of the batch-mean loss for the given example indices.
using StepFn = std::function<BatchLoss(std::span<const std::size_t> batch)>;
// Higher is better; nullopt when there is no validation data.
using ValidateFn = std::function<std::optional<double>()>;

// Runs max_epochs of seeded-shuffle minibatch AdamW, keeping the
// parameters of the best validation epoch when validation is available.
TrainingLog run_training(std::size_t n_examples, const TaggerConfig& config,
                         const std::vector<nn::Param*>& params, const StepFn& step,
                         const ValidateFn& validate);

// Holds out round(fraction * n) indices (at least one when fraction > 0
// and n >= 2). Returns {train, validation}.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> validation_split(
    std::size_t n, double fraction, std::uint64_t seed);

void write_artifact(const std::filesystem::path& dir, const nlohmann::json& manifest,
                    const std::vector<const nn::Param*>& params);
nlohmann::json read_manifest(const std::filesystem::path& dir);
void read_weights(const std::filesystem::path& dir, const std::vector<nn::Param*>& params);

}  // namespace substan::detail
