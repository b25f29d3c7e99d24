#include "substan/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <regex>

#include "substan/random.hpp"
#include "substan/text.hpp"

namespace substan {

std::uint64_t fnv1a(std::string_view s, std::uint64_t h) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

std::string lower(const std::string& s) {
  std::string out = s;
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool sentence_final(const std::string& t) { return t == "." || t == "!" || t == "?"; }

std::string shape(const std::string& t) {
  std::string out;
  for (unsigned char c : t) {
    char k;
    if (c >= 'A' && c <= 'Z') k = 'X';
    else if (c >= 'a' && c <= 'z') k = 'x';
    else if (c >= '0' && c <= '9') k = 'd';
    else if (c >= 0x80) k = 'u';
    else k = static_cast<char>(c);
    if (out.empty() || out.back() != k) out.push_back(k);
  }
  return out;
}

// Exact below 16, log2-spaced above.
std::string bucket(std::size_t d) {
  if (d < 16) return std::to_string(d);
  int k = 0;
  while ((std::size_t{1} << (k + 1)) <= d) ++k;
  return "L" + std::to_string(k);
}

std::string prefix(const std::string& s, std::size_t n) { return s.substr(0, std::min(n, s.size())); }
std::string suffix(const std::string& s, std::size_t n) {
  return s.size() <= n ? s : s.substr(s.size() - n);
}

// Where the claim tokens sit inside the review tokens, if anywhere. A
// window may cut the claim, so partial alignments at the edges count.
struct Occurrence {
  bool found = false;
  std::size_t start = 0;
  std::size_t end = 0;
};

Occurrence locate(const std::vector<std::string>& claim, const std::vector<std::string>& review) {
  Occurrence occ;
  if (claim.empty() || review.empty()) return occ;
  const auto nc = static_cast<long>(claim.size());
  const auto nr = static_cast<long>(review.size());
  long best_matches = 0;
  long best_offset = 0;
  for (long p = -nc + 1; p < nr; ++p) {
    long matches = 0;
    const long lo = std::max(0L, -p);
    const long hi = std::min(nc, nr - p);
    for (long k = lo; k < hi; ++k) {
      if (claim[k] == review[p + k]) ++matches;
    }
    const long visible = hi - lo;
    if (matches * 2 > visible && matches > best_matches) {
      best_matches = matches;
      best_offset = p;
    }
  }
  if (best_matches == 0) return occ;
  occ.found = true;
  occ.start = static_cast<std::size_t>(std::max(0L, best_offset));
  occ.end = static_cast<std::size_t>(std::min(nr, best_offset + nc));
  return occ;
}

class HashConvEncoder final : public Encoder {
 public:
  HashConvEncoder(std::string id, std::size_t dim, int log2_buckets, int layers,
                  std::uint64_t seed)
      : id_(std::move(id)),
        dim_(dim),
        buckets_(std::size_t{1} << log2_buckets),
        embed_("embed", buckets_ * dim, true, dim),
        embed_bias_("embed_bias", dim, false) {
    std::mt19937_64 rng(seed);
    nn::init_uniform(embed_.value, 0.05f, rng);
    for (int l = 0; l < layers; ++l) {
      const std::string tag = l == 0 ? "" : std::to_string(l);
      conv_.emplace_back("conv" + tag, 3 * dim * dim, true);
      conv_bias_.emplace_back("conv_bias" + tag, dim, false);
      nn::init_uniform(conv_.back().value, static_cast<float>(std::sqrt(6.0 / (4.0 * dim))), rng);
    }
  }

  const std::string& id() const override { return id_; }
  std::size_t dim() const override { return dim_; }

  FeatureSequence featurize(const std::vector<std::string>& tokens) const override;
  nn::Matrix forward(const FeatureSequence& x, EncoderTrace* trace) const override;
  void backward(const FeatureSequence& x, const EncoderTrace& trace,
                const nn::Matrix& grad_out) override;

  std::vector<nn::Param*> params() override {
    std::vector<nn::Param*> p{&embed_, &embed_bias_};
    for (std::size_t l = 0; l < conv_.size(); ++l) {
      p.push_back(&conv_[l]);
      p.push_back(&conv_bias_[l]);
    }
    return p;
  }
  std::vector<const nn::Param*> params() const override {
    std::vector<const nn::Param*> p{&embed_, &embed_bias_};
    for (std::size_t l = 0; l < conv_.size(); ++l) {
      p.push_back(&conv_[l]);
      p.push_back(&conv_bias_[l]);
    }
    return p;
  }

 private:
  std::uint32_t hash(std::string_view f) const {
    return static_cast<std::uint32_t>(fnv1a(f) % buckets_);
  }
  void lexical_features(const std::vector<std::string>& lw, const std::vector<std::string>& raw,
                        std::size_t i, std::vector<std::string>& out) const;

  std::string id_;
  std::size_t dim_;
  std::size_t buckets_;
  nn::Param embed_;
  nn::Param embed_bias_;
  // Per layer: [offset -1, 0, +1] blocks of dim x dim, row-major (out, in).
  // Layer l has dilation 2^l.
  std::vector<nn::Param> conv_;
  std::vector<nn::Param> conv_bias_;
};

void HashConvEncoder::lexical_features(const std::vector<std::string>& lw,
                                       const std::vector<std::string>& raw, std::size_t i,
                                       std::vector<std::string>& out) const {
  const auto at = [&](long k) -> const std::string& {
    static const std::string kPad = "<pad>";
    return (k < 0 || k >= static_cast<long>(lw.size())) ? kPad : lw[static_cast<std::size_t>(k)];
  };
  const long li = static_cast<long>(i);
  const std::string& w = lw[i];
  out.push_back("bias");
  out.push_back("w=" + w);
  out.push_back("p3=" + prefix(w, 3));
  out.push_back("s3=" + suffix(w, 3));
  out.push_back("shape=" + shape(raw[i]));
  out.push_back("w-1=" + at(li - 1));
  out.push_back("w+1=" + at(li + 1));
  out.push_back("w-2=" + at(li - 2));
  out.push_back("w+2=" + at(li + 2));
  out.push_back("bg-=" + at(li - 1) + "|" + w);
  out.push_back("bg+=" + w + "|" + at(li + 1));
}

FeatureSequence HashConvEncoder::featurize(const std::vector<std::string>& tokens) const {
  const std::size_t n = tokens.size();
  std::vector<std::string> lw(n);
  for (std::size_t i = 0; i < n; ++i) lw[i] = lower(tokens[i]);

  // Pair layout: [CLS] claim [SEP] review with at least one review token.
  std::size_t sep = n;
  if (n > 0 && tokens[0] == kClsToken) {
    for (std::size_t i = 1; i < n; ++i) {
      if (tokens[i] == kSepToken) {
        sep = i;
        break;
      }
    }
  }
  const bool pair = sep + 1 < n;

  // Distance to the previous / next sentence boundary.
  std::vector<std::size_t> since(n), until(n);
  for (std::size_t i = 0, d = 0; i < n; ++i) {
    since[i] = d;
    d = (sentence_final(lw[i]) || lw[i] == kClsToken || lw[i] == kSepToken) ? 0 : d + 1;
  }
  for (std::size_t i = n, d = 0; i-- > 0;) {
    until[i] = d;
    d = (sentence_final(lw[i]) || lw[i] == kClsToken || lw[i] == kSepToken) ? 0 : d + 1;
  }

  std::vector<std::vector<std::string>> names(n);
  for (std::size_t i = 0; i < n; ++i) {
    lexical_features(lw, tokens, i, names[i]);
    names[i].push_back("since=" + bucket(since[i]));
    names[i].push_back("until=" + bucket(until[i]));
  }

  if (pair) {
    const std::vector<std::string> claim(lw.begin() + 1, lw.begin() + static_cast<long>(sep));
    const std::vector<std::string> review(lw.begin() + static_cast<long>(sep) + 1, lw.end());
    const Occurrence occ = locate(claim, review);
    std::vector<std::string> bag(claim);
    std::sort(bag.begin(), bag.end());
    const auto in_bag = [&](const std::string& w) {
      return std::binary_search(bag.begin(), bag.end(), w);
    };

    for (std::size_t i = 1; i < sep; ++i) names[i].push_back("side=claim");
    for (std::size_t r = 0; r < review.size(); ++r) {
      auto& f = names[sep + 1 + r];
      f.push_back("side=review");
      if (!occ.found) {
        f.push_back("noocc");
        if (in_bag(review[r])) f.push_back("inbag");
        continue;
      }
      if (r < occ.start) {
        f.push_back("before=" + bucket(occ.start - r));
      } else if (r < occ.end) {
        f.push_back("inclaim");
      } else {
        const std::size_t d = r - occ.end;
        std::size_t sentences = 0;
        for (std::size_t k = occ.end; k < r; ++k) sentences += sentence_final(review[k]);
        f.push_back("after=" + bucket(d));
        f.push_back("sents_after=" + std::to_string(std::min<std::size_t>(sentences, 6)));
        f.push_back("sents_after=" + std::to_string(std::min<std::size_t>(sentences, 6)) +
                    "|until=" + bucket(until[sep + 1 + r]));
        if (d < 4) f.push_back("after=" + bucket(d) + "|w=" + review[r]);
      }
      if (r >= occ.end && in_bag(review[r])) f.push_back("inbag");
    }

    auto& cls = names[0];
    for (const auto& w : claim) cls.push_back("cls_cw=" + w);
    cls.push_back("cls_clen=" + bucket(claim.size()));
    if (occ.found) {
      for (std::size_t k = 0; k < 3 && occ.end + k < review.size(); ++k) {
        cls.push_back("cls_next" + std::to_string(k) + "=" + review[occ.end + k]);
      }
      cls.push_back("cls_tail=" + bucket(review.size() - occ.end));
      if (occ.start > 0) cls.push_back("cls_prev=" + review[occ.start - 1]);
    } else {
      cls.push_back("cls_noocc");
    }
  }

  FeatureSequence out;
  out.features.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& ids = out.features[i];
    ids.reserve(names[i].size());
    for (const auto& name : names[i]) ids.push_back(hash(name));
  }
  return out;
}

// Activations: [0] a = tanh(sum of embeddings), then per layer l the
// conv output c_l = tanh(conv_l(h_l)) with h_0 = a, h_{l+1} = h_l + c_l.
nn::Matrix HashConvEncoder::forward(const FeatureSequence& x, EncoderTrace* trace) const {
  const std::size_t n = x.size();
  const std::size_t d = dim_;
  nn::Matrix a(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    float* ai = a.row(i);
    for (std::size_t k = 0; k < d; ++k) ai[k] = embed_bias_.value[k];
    for (auto f : x.features[i]) {
      const float* e = embed_.value.data() + static_cast<std::size_t>(f) * d;
      for (std::size_t k = 0; k < d; ++k) ai[k] += e[k];
    }
    for (std::size_t k = 0; k < d; ++k) ai[k] = std::tanh(ai[k]);
  }
  if (trace) trace->activations.assign(1, a);
  nn::Matrix h = std::move(a);
  for (std::size_t l = 0; l < conv_.size(); ++l) {
    const long dil = 1L << l;
    nn::Matrix c(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      float* ci = c.row(i);
      for (std::size_t k = 0; k < d; ++k) ci[k] = conv_bias_[l].value[k];
      for (int off = -1; off <= 1; ++off) {
        const long j = static_cast<long>(i) + off * dil;
        if (j < 0 || j >= static_cast<long>(n)) continue;
        const float* hj = h.row(static_cast<std::size_t>(j));
        const float* w = conv_[l].value.data() + static_cast<std::size_t>(off + 1) * d * d;
        for (std::size_t o = 0; o < d; ++o) {
          const float* wo = w + o * d;
          float s = 0.0f;
          for (std::size_t k = 0; k < d; ++k) s += wo[k] * hj[k];
          ci[o] += s;
        }
      }
      for (std::size_t k = 0; k < d; ++k) ci[k] = std::tanh(ci[k]);
    }
    for (std::size_t i = 0; i < n * d; ++i) h.data[i] += c.data[i];
    if (trace) trace->activations.push_back(std::move(c));
  }
  return h;
}

void HashConvEncoder::backward(const FeatureSequence& x, const EncoderTrace& trace,
                               const nn::Matrix& grad_out) {
  const std::size_t n = x.size();
  const std::size_t d = dim_;
  const std::size_t layers = conv_.size();

  // Rebuild the layer inputs h_l from a and the conv outputs.
  std::vector<nn::Matrix> hs;
  hs.push_back(trace.activations.at(0));
  for (std::size_t l = 0; l + 1 < layers; ++l) {
    nn::Matrix next = hs.back();
    const nn::Matrix& c = trace.activations.at(l + 1);
    for (std::size_t i = 0; i < n * d; ++i) next.data[i] += c.data[i];
    hs.push_back(std::move(next));
  }

  nn::Matrix dh = grad_out;
  for (std::size_t l = layers; l-- > 0;) {
    const nn::Matrix& c = trace.activations.at(l + 1);
    const nn::Matrix& hl = hs[l];
    const long dil = 1L << l;
    nn::Matrix dz(n, d);
    for (std::size_t i = 0; i < n * d; ++i) dz.data[i] = dh.data[i] * (1.0f - c.data[i] * c.data[i]);
    nn::Matrix dprev = dh;  // residual path
    for (std::size_t i = 0; i < n; ++i) {
      const float* dzi = dz.row(i);
      for (std::size_t k = 0; k < d; ++k) conv_bias_[l].grad[k] += dzi[k];
      for (int off = -1; off <= 1; ++off) {
        const long j = static_cast<long>(i) + off * dil;
        if (j < 0 || j >= static_cast<long>(n)) continue;
        const float* hj = hl.row(static_cast<std::size_t>(j));
        float* dj = dprev.row(static_cast<std::size_t>(j));
        const std::size_t block = static_cast<std::size_t>(off + 1) * d * d;
        const float* w = conv_[l].value.data() + block;
        float* gw = conv_[l].grad.data() + block;
        for (std::size_t o = 0; o < d; ++o) {
          const float g = dzi[o];
          if (g == 0.0f) continue;
          const float* wo = w + o * d;
          float* gwo = gw + o * d;
          for (std::size_t k = 0; k < d; ++k) {
            gwo[k] += g * hj[k];
            dj[k] += g * wo[k];
          }
        }
      }
    }
    dh = std::move(dprev);
  }

  const nn::Matrix& a = trace.activations.at(0);
  for (std::size_t i = 0; i < n; ++i) {
    const float* ai = a.row(i);
    float* dai = dh.row(i);
    for (std::size_t k = 0; k < d; ++k) dai[k] *= (1.0f - ai[k] * ai[k]);
    for (std::size_t k = 0; k < d; ++k) embed_bias_.grad[k] += dai[k];
    for (auto f : x.features[i]) {
      embed_.touch(f);
      float* g = embed_.grad.data() + static_cast<std::size_t>(f) * d;
      for (std::size_t k = 0; k < d; ++k) g[k] += dai[k];
    }
  }
}

}  // namespace

std::unique_ptr<Encoder> HashConvBackend::create(const std::string& encoder_id,
                                                 std::uint64_t seed) const {
  static const std::regex kPattern(R"(hashconv(?:-d(\d+)-b(\d+)(?:-l(\d+))?)?)");
  std::smatch m;
  if (!std::regex_match(encoder_id, m, kPattern)) {
    throw BackendError("unknown encoder id '" + encoder_id + "'");
  }
  std::size_t dim = 32;
  int log2_buckets = 17;
  int layers = 3;
  if (m[1].matched) {
    dim = std::stoul(m[1].str());
    log2_buckets = std::stoi(m[2].str());
  }
  if (m[3].matched) layers = std::stoi(m[3].str());
  if (dim < 4 || dim > 1024 || log2_buckets < 8 || log2_buckets > 24 || layers < 1 || layers > 8) {
    throw BackendError("encoder id '" + encoder_id + "' is out of the supported size range");
  }
  return std::make_unique<HashConvEncoder>(encoder_id, dim, log2_buckets, layers, seed);
}

const EncoderBackend& default_backend() {
  static const HashConvBackend backend;
  return backend;
}

}  // namespace substan
