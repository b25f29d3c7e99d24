#include "substan/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "substan/errors.hpp"
#include "substan/random.hpp"

namespace substan::nn {

Param::Param(std::string n, std::size_t size, bool apply_decay, std::size_t row_width)
    : name(std::move(n)),
      value(size, 0.0f),
      grad(size, 0.0f),
      m(size, 0.0f),
      v(size, 0.0f),
      decay(apply_decay),
      row_dim(row_width) {
  if (row_dim) touched_mask.assign(size / row_dim, 0);
}

void Param::touch(std::uint32_t row) {
  if (!touched_mask[row]) {
    touched_mask[row] = 1;
    touched.push_back(row);
  }
}

void Param::zero_grad() {
  if (row_dim) {
    for (auto r : touched) {
      std::fill_n(grad.begin() + static_cast<std::ptrdiff_t>(r * row_dim), row_dim, 0.0f);
      touched_mask[r] = 0;
    }
    touched.clear();
  } else {
    std::fill(grad.begin(), grad.end(), 0.0f);
  }
}

void AdamW::update(Param& p, std::size_t begin, std::size_t end, double bias1,
                   double bias2) const {
  const double lr = options_.learning_rate;
  const double wd = p.decay ? options_.weight_decay : 0.0;
  const auto b1 = static_cast<float>(options_.beta1);
  const auto b2 = static_cast<float>(options_.beta2);
  for (std::size_t i = begin; i < end; ++i) {
    const float g = p.grad[i];
    p.m[i] = b1 * p.m[i] + (1.0f - b1) * g;
    p.v[i] = b2 * p.v[i] + (1.0f - b2) * g * g;
    const double mhat = p.m[i] / bias1;
    const double vhat = p.v[i] / bias2;
    double w = p.value[i];
    w -= lr * wd * w;
    w -= lr * mhat / (std::sqrt(vhat) + options_.eps);
    p.value[i] = static_cast<float>(w);
  }
}

void AdamW::step(const std::vector<Param*>& params) {
  ++t_;
  const double bias1 = 1.0 - std::pow(options_.beta1, static_cast<double>(t_));
  const double bias2 = 1.0 - std::pow(options_.beta2, static_cast<double>(t_));
  for (Param* p : params) {
    if (p->row_dim) {
      for (auto r : p->touched) {
        update(*p, r * p->row_dim, (r + 1) * p->row_dim, bias1, bias2);
      }
    } else {
      update(*p, 0, p->value.size(), bias1, bias2);
    }
  }
}

void init_uniform(std::vector<float>& v, float scale, std::mt19937_64& rng) {
  for (auto& x : v) x = static_cast<float>((2.0 * uniform_unit(rng) - 1.0) * scale);
}

void softmax(float* x, std::size_t n) {
  if (n == 0) return;
  const float mx = *std::max_element(x, x + n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::exp(x[i] - mx);
    sum += x[i];
  }
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<float>(x[i] / sum);
}

namespace {

template <typename T>
void put(std::ostream& out, T value) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value;
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw DataError("truncated parameter file");
  }
  return value;
}

constexpr char kMagic[4] = {'S', 'U', 'B', 'W'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void write_params(std::ostream& out, const std::vector<const Param*>& params) {
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const Param* p : params) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    put<std::uint64_t>(out, p->value.size());
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(float)));
  }
}

void read_params(std::istream& in, const std::vector<Param*>& params) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError("not a parameter file");
  }
  if (get<std::uint32_t>(in) != kVersion) throw DataError("unsupported parameter file version");
  const auto count = get<std::uint32_t>(in);
  if (count != params.size()) {
    throw DataError("parameter file holds " + std::to_string(count) + " tensors, model expects " +
                    std::to_string(params.size()));
  }
  for (Param* p : params) {
    std::string name(get<std::uint32_t>(in), '\0');
    in.read(name.data(), static_cast<std::streamsize>(name.size()));
    const auto size = get<std::uint64_t>(in);
    if (name != p->name || size != p->value.size()) {
      throw DataError("parameter '" + name + "' does not match model tensor '" + p->name + "'");
    }
    if (!in.read(reinterpret_cast<char*>(p->value.data()),
                 static_cast<std::streamsize>(size * sizeof(float)))) {
      throw DataError("truncated parameter file");
    }
  }
}

}  // namespace substan::nn
