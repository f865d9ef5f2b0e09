// sfs/nn.h -- parameter registry and neural layers.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "sfs/autodiff.h"

namespace sfs::nn {

using ad::Var;

// Central registry of named trainable tensors. Names are hierarchical
// ("prior_encoder.score_encoder.block0.attn.wq"), ordered and stable, which
// makes optimizers, checkpoints and parameter counting straightforward.
class ParamStore {
 public:
  explicit ParamStore(uint64_t init_seed = 0) : rng_(init_seed) {}

  Var add(const std::string& name, Tensor init);
  // Uniform(-limit, limit) init, the default for linear/conv weights.
  Var add_uniform(const std::string& name, std::vector<int64_t> shape, double limit);
  Var add_zeros(const std::string& name, std::vector<int64_t> shape);
  Var add_full(const std::string& name, std::vector<int64_t> shape, double v);

  const std::map<std::string, Var>& params() const { return params_; }
  Var get(const std::string& name) const;
  int64_t count(const std::string& prefix = "") const;
  void zero_grad();
  void set_requires_grad(bool on);
  Rng& rng() { return rng_; }

 private:
  std::map<std::string, Var> params_;
  Rng rng_;
};

struct RunState {
  bool training = false;
  Rng* rng = nullptr;
};

class Linear {
 public:
  Linear() = default;
  Linear(ParamStore& ps, const std::string& name, int64_t in, int64_t out,
         bool bias = true);
  Var forward(const Var& x) const;  // [T,in] -> [T,out]

  Var w, b;
};

class Conv1d {
 public:
  Conv1d() = default;
  Conv1d(ParamStore& ps, const std::string& name, int64_t in, int64_t out,
         int64_t kernel, int64_t stride = 1, int64_t dilation = 1,
         int64_t pad = -1, bool bias = true);  // pad<0 means "same" for stride 1
  Var forward(const Var& x) const;

  Var w, b;
  int64_t stride = 1, pad = 0, dilation = 1;
};

class ConvTranspose1d {
 public:
  ConvTranspose1d() = default;
  ConvTranspose1d(ParamStore& ps, const std::string& name, int64_t in,
                  int64_t out, int64_t kernel, int64_t stride, int64_t pad,
                  bool bias = true);
  Var forward(const Var& x) const;

  Var w, b;
  int64_t stride = 1, pad = 0;
};

class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(ParamStore& ps, const std::string& name, int64_t in, int64_t out,
         int64_t kh, int64_t kw, int64_t sh, int64_t sw, int64_t ph, int64_t pw,
         bool bias = true);
  Var forward(const Var& x) const;

  Var w, b;
  int64_t sh = 1, sw = 1, ph = 0, pw = 0;
};

class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(ParamStore& ps, const std::string& name, int64_t dim);
  Var forward(const Var& x) const { return ad::layer_norm(x, g, b); }

  Var g, b;
};

class Embedding {
 public:
  Embedding() = default;
  Embedding(ParamStore& ps, const std::string& name, int64_t vocab, int64_t dim);
  Var forward(const std::vector<int64_t>& ids) const;

  Var w;
};

// Standard scaled-dot-product self-attention with optional key padding:
// positions >= valid_len attend nowhere and are ignored as keys.
class MultiHeadSelfAttention {
 public:
  MultiHeadSelfAttention() = default;
  MultiHeadSelfAttention(ParamStore& ps, const std::string& name, int64_t dim,
                         int64_t heads);
  Var forward(const Var& x, int64_t valid_len, const RunState& rs,
              double dropout_p) const;

  Linear wq, wk, wv, wo;
  int64_t heads = 1, dim = 0;
};

// Feed-forward Transformer block: self-attention + conv1d feed-forward,
// both with residual connections and layer norm (post-norm).
class FftBlock {
 public:
  FftBlock() = default;
  FftBlock(ParamStore& ps, const std::string& name, int64_t dim,
           int64_t filter_dim, int64_t heads, int64_t ffn_kernel,
           double dropout_p);
  Var forward(const Var& x, int64_t valid_len, const RunState& rs) const;

  MultiHeadSelfAttention attn;
  Conv1d ffn1, ffn2;
  LayerNorm ln1, ln2;
  double dropout_p = 0.1;
};

// Sinusoidal positions added to embeddings; returns [T,dim].
Tensor sinusoidal_positions(int64_t t, int64_t dim);

// Zero the rows at and beyond valid_len (padding mask).
Var mask_rows(const Var& x, int64_t valid_len);

}  // namespace sfs::nn
