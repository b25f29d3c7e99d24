#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace substan::nn {

// Row-major dense matrix of floats.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0f) {}

  float& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  float operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  float* row(std::size_t r) { return data.data() + r * cols; }
  const float* row(std::size_t r) const { return data.data() + r * cols; }
};

// A trainable tensor with its gradient and AdamW moments. When row_dim is
// nonzero the parameter is an embedding table updated lazily: only rows
// marked touched receive an optimizer step.
struct Param {
  std::string name;
  std::vector<float> value;
  std::vector<float> grad;
  std::vector<float> m;
  std::vector<float> v;
  bool decay = true;
  std::size_t row_dim = 0;
  std::vector<std::uint32_t> touched;
  std::vector<std::uint8_t> touched_mask;

  Param() = default;
  Param(std::string n, std::size_t size, bool apply_decay, std::size_t row_width = 0);

  void touch(std::uint32_t row);
  void zero_grad();
};

struct AdamWOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

class AdamW {
 public:
  explicit AdamW(AdamWOptions options) : options_(options) {}

  void step(const std::vector<Param*>& params);
  long steps() const { return t_; }

 private:
  void update(Param& p, std::size_t begin, std::size_t end, double bias1, double bias2) const;

  AdamWOptions options_;
  long t_ = 0;
};

void init_uniform(std::vector<float>& v, float scale, std::mt19937_64& rng);

// Numerically stable in-place softmax over [begin, end).
void softmax(float* x, std::size_t n);

// Binary parameter snapshot. Format: magic "SUBW", u32 version, u32 count,
// then per parameter u32 name length, name bytes, u64 size, float32 values,
// all little-endian.
void write_params(std::ostream& out, const std::vector<const Param*>& params);
void read_params(std::istream& in, const std::vector<Param*>& params);

}  // namespace substan::nn
