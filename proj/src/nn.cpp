// src/nn.cpp
#include "sfs/nn.h"

#include <cmath>

namespace sfs::nn {

Var ParamStore::add(const std::string& name, Tensor init) {
  require(!params_.count(name), "duplicate parameter name");
  Var v = Var::leaf(std::move(init), true);
  params_.emplace(name, v);
  return v;
}

Var ParamStore::add_uniform(const std::string& name, std::vector<int64_t> shape,
                            double limit) {
  Tensor t(std::move(shape));
  for (double& v : t.data) v = rng_.uniform(-limit, limit);
  return add(name, std::move(t));
}

Var ParamStore::add_zeros(const std::string& name, std::vector<int64_t> shape) {
  return add(name, Tensor(std::move(shape)));
}

Var ParamStore::add_full(const std::string& name, std::vector<int64_t> shape,
                         double v) {
  return add(name, Tensor::full(std::move(shape), v));
}

Var ParamStore::get(const std::string& name) const {
  auto it = params_.find(name);
  require(it != params_.end(), "unknown parameter name");
  return it->second;
}

int64_t ParamStore::count(const std::string& prefix) const {
  int64_t n = 0;
  for (const auto& [name, v] : params_)
    if (name.rfind(prefix, 0) == 0) n += v.val().numel();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& [name, v] : params_) v.node()->clear_grad();
}

void ParamStore::set_requires_grad(bool on) {
  for (auto& [name, v] : params_) v.node()->requires_grad = on;
}

// ------------------------------------------------------------------- layers

Linear::Linear(ParamStore& ps, const std::string& name, int64_t in, int64_t out,
               bool bias) {
  const double limit = std::sqrt(1.0 / static_cast<double>(in));
  w = ps.add_uniform(name + ".w", {out, in}, limit);
  if (bias) b = ps.add_uniform(name + ".b", {out}, limit);
}

Var Linear::forward(const Var& x) const {
  Var y = ad::matmul(x, w, false, true);
  if (b.defined()) y = ad::add_rowvec(y, b);
  return y;
}

Conv1d::Conv1d(ParamStore& ps, const std::string& name, int64_t in, int64_t out,
               int64_t kernel, int64_t stride_, int64_t dilation_, int64_t pad_,
               bool bias)
    : stride(stride_), dilation(dilation_) {
  pad = pad_ >= 0 ? pad_ : dilation_ * (kernel - 1) / 2;
  const double limit = std::sqrt(1.0 / static_cast<double>(in * kernel));
  w = ps.add_uniform(name + ".w", {out, in, kernel}, limit);
  if (bias) b = ps.add_uniform(name + ".b", {out}, limit);
}

Var Conv1d::forward(const Var& x) const {
  return ad::conv1d(x, w, b, stride, pad, dilation);
}

ConvTranspose1d::ConvTranspose1d(ParamStore& ps, const std::string& name,
                                 int64_t in, int64_t out, int64_t kernel,
                                 int64_t stride_, int64_t pad_, bool bias)
    : stride(stride_), pad(pad_) {
  const double limit = std::sqrt(1.0 / static_cast<double>(in * kernel));
  w = ps.add_uniform(name + ".w", {in, out, kernel}, limit);
  if (bias) b = ps.add_uniform(name + ".b", {out}, limit);
}

Var ConvTranspose1d::forward(const Var& x) const {
  return ad::conv_transpose1d(x, w, b, stride, pad);
}

Conv2d::Conv2d(ParamStore& ps, const std::string& name, int64_t in, int64_t out,
               int64_t kh, int64_t kw, int64_t sh_, int64_t sw_, int64_t ph_,
               int64_t pw_, bool bias)
    : sh(sh_), sw(sw_), ph(ph_), pw(pw_) {
  const double limit = std::sqrt(1.0 / static_cast<double>(in * kh * kw));
  w = ps.add_uniform(name + ".w", {out, kh, kw, in}, limit);
  if (bias) b = ps.add_uniform(name + ".b", {out}, limit);
}

Var Conv2d::forward(const Var& x) const {
  return ad::conv2d(x, w, b, sh, sw, ph, pw);
}

LayerNorm::LayerNorm(ParamStore& ps, const std::string& name, int64_t dim) {
  g = ps.add_full(name + ".g", {dim}, 1.0);
  b = ps.add_zeros(name + ".b", {dim});
}

Embedding::Embedding(ParamStore& ps, const std::string& name, int64_t vocab,
                     int64_t dim) {
  Tensor t({vocab, dim});
  for (double& v : t.data) v = ps.rng().normal(0.0, 0.02);
  w = ps.add(name + ".w", std::move(t));
}

Var Embedding::forward(const std::vector<int64_t>& ids) const {
  return ad::gather_rows(w, std::vector<int64_t>(ids.begin(), ids.end()));
}

MultiHeadSelfAttention::MultiHeadSelfAttention(ParamStore& ps,
                                               const std::string& name,
                                               int64_t dim_, int64_t heads_) {
  dim = dim_;
  heads = heads_;
  require(dim % heads == 0, "attention dim divisible by heads");
  wq = Linear(ps, name + ".wq", dim, dim);
  wk = Linear(ps, name + ".wk", dim, dim);
  wv = Linear(ps, name + ".wv", dim, dim);
  wo = Linear(ps, name + ".wo", dim, dim);
}

Var MultiHeadSelfAttention::forward(const Var& x, int64_t valid_len,
                                    const RunState& rs, double dropout_p) const {
  const int64_t T = x.val().rows();
  const int64_t V = valid_len < 0 ? T : valid_len;
  const int64_t hd = dim / heads;
  Var q = wq.forward(x), k = wk.forward(x), v = wv.forward(x);
  std::vector<Var> outs;
  outs.reserve(static_cast<size_t>(heads));
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  for (int64_t h = 0; h < heads; ++h) {
    Var qh = ad::slice_cols(q, h * hd, (h + 1) * hd);
    Var kh = ad::slice_cols(k, h * hd, (h + 1) * hd);
    Var vh = ad::slice_cols(v, h * hd, (h + 1) * hd);
    Var scores = ad::smul(ad::matmul(qh, kh, false, true), scale);  // [T,T]
    Var attn = ad::softmax_rows(scores, V);
    if (rs.training && dropout_p > 0.0)
      attn = ad::dropout(attn, dropout_p, *rs.rng, true);
    outs.push_back(ad::matmul(attn, vh));
  }
  return wo.forward(ad::concat_cols(outs));
}

FftBlock::FftBlock(ParamStore& ps, const std::string& name, int64_t dim,
                   int64_t filter_dim, int64_t heads, int64_t ffn_kernel,
                   double dropout_p_)
    : dropout_p(dropout_p_) {
  attn = MultiHeadSelfAttention(ps, name + ".attn", dim, heads);
  ffn1 = Conv1d(ps, name + ".ffn1", dim, filter_dim, ffn_kernel);
  ffn2 = Conv1d(ps, name + ".ffn2", filter_dim, dim, ffn_kernel);
  ln1 = LayerNorm(ps, name + ".ln1", dim);
  ln2 = LayerNorm(ps, name + ".ln2", dim);
}

Var FftBlock::forward(const Var& x, int64_t valid_len, const RunState& rs) const {
  Var h = attn.forward(x, valid_len, rs, dropout_p);
  if (rs.training && dropout_p > 0.0) h = ad::dropout(h, dropout_p, *rs.rng, true);
  h = ln1.forward(ad::add(x, h));
  if (valid_len >= 0) h = mask_rows(h, valid_len);
  Var f = ad::relu(ffn1.forward(h));
  f = ffn2.forward(f);
  if (rs.training && dropout_p > 0.0) f = ad::dropout(f, dropout_p, *rs.rng, true);
  Var out = ln2.forward(ad::add(h, f));
  if (valid_len >= 0) out = mask_rows(out, valid_len);
  return out;
}

Tensor sinusoidal_positions(int64_t t, int64_t dim) {
  Tensor pe({t, dim});
  for (int64_t pos = 0; pos < t; ++pos)
    for (int64_t i = 0; i < dim; ++i) {
      const double angle =
          static_cast<double>(pos) /
          std::pow(10000.0, 2.0 * static_cast<double>(i / 2) / static_cast<double>(dim));
      pe.data[pos * dim + i] = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  return pe;
}

Var mask_rows(const Var& x, int64_t valid_len) {
  const int64_t T = x.val().rows();
  if (valid_len >= T) return x;
  Tensor m({T, 1});
  for (int64_t t = 0; t < T; ++t) m.data[t] = t < valid_len ? 1.0 : 0.0;
  return ad::mul_colvec(x, Var::constant(std::move(m)));
}

}  // namespace sfs::nn
