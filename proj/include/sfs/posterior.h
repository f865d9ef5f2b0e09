// sfs/posterior.h -- posterior encoder over ground-truth acoustic features.
#pragma once

#include "sfs/config.h"
#include "sfs/latent.h"
#include "sfs/nn.h"

namespace sfs {

// Stacked 1-D convolutions with layer norm over [mcep | log_f0 | vuv],
// producing the frame-level posterior mean and log variance.
class PosteriorEncoder {
 public:
  PosteriorEncoder() = default;
  PosteriorEncoder(nn::ParamStore& ps, const std::string& name,
                   const PosteriorConfig& cfg, int64_t mcep_dims,
                   int64_t latent_dim);

  // Inputs are normalized and frame-aligned; ShapeMismatch otherwise.
  LatentSequence forward(const Tensor& mcep, const std::vector<double>& log_f0,
                         const std::vector<char>& vuv) const;

 private:
  std::vector<nn::Conv1d> convs_;
  std::vector<nn::LayerNorm> norms_;
  nn::Linear mean_head_, logvar_head_;
  int64_t mcep_dims_ = 0;
};

}  // namespace sfs
