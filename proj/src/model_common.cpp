#include "model_common.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "substan/errors.hpp"
#include "substan/random.hpp"

namespace substan::detail {

Linear::Linear(const std::string& name, std::size_t in_dim, std::size_t out_dim,
               std::mt19937_64& rng)
    : in(in_dim),
      out(out_dim),
      weight(name + ".weight", in_dim * out_dim, true),
      bias(name + ".bias", out_dim, false) {
  nn::init_uniform(weight.value, static_cast<float>(std::sqrt(1.0 / in_dim)), rng);
}

nn::Matrix Linear::forward(const nn::Matrix& x) const {
  nn::Matrix y(x.rows, out);
  for (std::size_t r = 0; r < x.rows; ++r) {
    const float* xr = x.row(r);
    float* yr = y.row(r);
    for (std::size_t o = 0; o < out; ++o) {
      const float* w = weight.value.data() + o * in;
      float s = bias.value[o];
      for (std::size_t k = 0; k < in; ++k) s += w[k] * xr[k];
      yr[o] = s;
    }
  }
  return y;
}

nn::Matrix Linear::backward(const nn::Matrix& x, const nn::Matrix& grad_y) {
  nn::Matrix dx(x.rows, in);
  for (std::size_t r = 0; r < x.rows; ++r) {
    const float* xr = x.row(r);
    const float* gy = grad_y.row(r);
    float* dxr = dx.row(r);
    for (std::size_t o = 0; o < out; ++o) {
      const float g = gy[o];
      if (g == 0.0f) continue;
      bias.grad[o] += g;
      const float* w = weight.value.data() + o * in;
      float* gw = weight.grad.data() + o * in;
      for (std::size_t k = 0; k < in; ++k) {
        gw[k] += g * xr[k];
        dxr[k] += g * w[k];
      }
    }
  }
  return dx;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> validation_split(
    std::size_t n, double fraction, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::size_t n_val = 0;
  if (fraction > 0.0 && n >= 2) {
    n_val = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(fraction * n)), 1, n - 1);
  }
  std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ULL);
  shuffle_in_place(order, rng);
  std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<long>(n_val));
  std::vector<std::size_t> train(order.begin() + static_cast<long>(n_val), order.end());
  std::sort(val.begin(), val.end());
  std::sort(train.begin(), train.end());
  return {train, val};
}

TrainingLog run_training(std::size_t n_examples, const TaggerConfig& config,
                         const std::vector<nn::Param*>& params, const StepFn& step,
                         const ValidateFn& validate) {
  nn::AdamW optimizer({.learning_rate = config.learning_rate,
                       .weight_decay = config.weight_decay});
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(n_examples);
  for (std::size_t i = 0; i < n_examples; ++i) order[i] = i;

  TrainingLog log;
  std::optional<double> best;
  std::vector<std::vector<float>> best_values;
  int bad_epochs = 0;
  const auto batch = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle_in_place(order, rng);
    BatchLoss total;
    for (std::size_t b = 0; b < order.size(); b += batch) {
      for (auto* p : params) p->zero_grad();
      const std::size_t e = std::min(order.size(), b + batch);
      const BatchLoss l = step(std::span<const std::size_t>(order.data() + b, e - b));
      total.loss_sum += l.loss_sum;
      total.weight += l.weight;
      optimizer.step(params);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = total.weight > 0.0 ? total.loss_sum / total.weight : 0.0;
    rec.validation_score = validate();
    log.epochs.push_back(rec);

    if (!rec.validation_score) {
      log.best_epoch = epoch;
      continue;
    }
    if (!best || *rec.validation_score > *best) {
      best = rec.validation_score;
      log.best_epoch = epoch;
      bad_epochs = 0;
      best_values.clear();
      for (auto* p : params) best_values.push_back(p->value);
    } else if (config.early_stop_patience > 0 && ++bad_epochs >= config.early_stop_patience) {
      log.stopped_early = epoch < config.max_epochs;
      break;
    }
  }
  if (!best_values.empty()) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = std::move(best_values[i]);
  }
  return log;
}

void write_artifact(const std::filesystem::path& dir, const nlohmann::json& manifest,
                    const std::vector<const nn::Param*>& params) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "config.json");
    if (!out) throw DataError("cannot write " + (dir / "config.json").string());
    out << manifest.dump(2) << '\n';
  }
  std::ofstream out(dir / "weights.bin", std::ios::binary);
  if (!out) throw DataError("cannot write " + (dir / "weights.bin").string());
  nn::write_params(out, params);
}

nlohmann::json read_manifest(const std::filesystem::path& dir) {
  std::ifstream in(dir / "config.json");
  if (!in) throw DataError("missing model manifest " + (dir / "config.json").string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed model manifest: " + std::string(e.what()));
  }
}

void read_weights(const std::filesystem::path& dir, const std::vector<nn::Param*>& params) {
  std::ifstream in(dir / "weights.bin", std::ios::binary);
  if (!in) throw DataError("missing model weights " + (dir / "weights.bin").string());
  nn::read_params(in, params);
}

}  // namespace substan::detail
