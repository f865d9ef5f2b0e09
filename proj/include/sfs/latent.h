// sfs/latent.h -- frame-level Gaussian sequence with reparameterized sampling.
#pragma once

#include "sfs/autodiff.h"

namespace sfs {

struct LatentSequence {
  ad::Var mean;     // [T, dim]
  ad::Var log_var;  // [T, dim]
  ad::Var z;        // [T, dim], set by sample()
  Tensor eps;       // the noise actually used (zeros when deterministic)

  int64_t frames() const { return mean.val().rows(); }
  int64_t dim() const { return mean.val().cols(); }

  // z = mean + exp(0.5 * log_var) * (noise_scale * eps); scale 0 leaves the
  // RNG untouched and gives z == mean exactly.
  void sample(Rng& rng, double noise_scale = 1.0) {
    eps = Tensor(mean.val().shape);
    if (noise_scale != 0.0)
      for (double& e : eps.data) e = noise_scale * rng.normal();
    z = ad::add(mean,
                ad::mul(ad::exp_(ad::smul(log_var, 0.5)), ad::Var::constant(eps)));
  }
};

}  // namespace sfs
