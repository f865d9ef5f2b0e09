// src/posterior.cpp
#include "sfs/posterior.h"

namespace sfs {

PosteriorEncoder::PosteriorEncoder(nn::ParamStore& ps, const std::string& name,
                                   const PosteriorConfig& cfg, int64_t mcep_dims,
                                   int64_t latent_dim)
    : mcep_dims_(mcep_dims) {
  require(cfg.layers >= 1, "posterior needs at least one layer");
  const int64_t in_dim = mcep_dims + 2;  // mcep | log_f0 | vuv
  for (int64_t l = 0; l < cfg.layers; ++l) {
    const std::string base = name + ".conv" + std::to_string(l);
    convs_.emplace_back(ps, base, l == 0 ? in_dim : cfg.hidden, cfg.hidden,
                        cfg.kernel);
    norms_.emplace_back(ps, base + ".ln", cfg.hidden);
  }
  mean_head_ = nn::Linear(ps, name + ".mean", cfg.hidden, latent_dim);
  logvar_head_ = nn::Linear(ps, name + ".logvar", cfg.hidden, latent_dim);
}

LatentSequence PosteriorEncoder::forward(const Tensor& mcep,
                                         const std::vector<double>& log_f0,
                                         const std::vector<char>& vuv) const {
  const int64_t t_frames = mcep.rows();
  if (mcep.cols() != mcep_dims_)
    throw ShapeMismatch("posterior expects " + std::to_string(mcep_dims_) +
                        " mcep dims");
  if (static_cast<int64_t>(log_f0.size()) != t_frames ||
      static_cast<int64_t>(vuv.size()) != t_frames)
    throw FrameMisalignment("posterior inputs must share the frame count");

  Tensor input({t_frames, mcep_dims_ + 2});
  for (int64_t t = 0; t < t_frames; ++t) {
    for (int64_t d = 0; d < mcep_dims_; ++d)
      input.at(t, d) = mcep.at(t, d);
    input.at(t, mcep_dims_) = log_f0[static_cast<size_t>(t)];
    input.at(t, mcep_dims_ + 1) = vuv[static_cast<size_t>(t)] ? 1.0 : 0.0;
  }

  ad::Var h = ad::Var::constant(std::move(input));
  for (size_t l = 0; l < convs_.size(); ++l)
    h = ad::gelu(norms_[l].forward(convs_[l].forward(h)));

  LatentSequence seq;
  seq.mean = mean_head_.forward(h);
  seq.log_var = logvar_head_.forward(h);
  return seq;
}

}  // namespace sfs
