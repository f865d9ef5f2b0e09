// sfs/discriminator.h -- multi-period and multi-resolution spectrogram
// discriminators. Every sub-discriminator returns its patch scores and the
// per-layer feature maps used by the feature-matching loss.
#pragma once

#include "sfs/config.h"
#include "sfs/dsp.h"
#include "sfs/nn.h"

namespace sfs {

struct DiscOutput {
  ad::Var score;                // flattened patch scores
  std::vector<ad::Var> feats;   // post-activation feature maps per layer
};

class DiscriminatorSet {
 public:
  DiscriminatorSet() = default;
  DiscriminatorSet(nn::ParamStore& ps, const std::string& name,
                   const DiscriminatorConfig& cfg);

  // wave: [L, 1] at the model sample rate
  std::vector<DiscOutput> forward(const ad::Var& wave) const;

  int64_t count() const {
    return static_cast<int64_t>(periods_.size() + resolutions_.size());
  }

 private:
  struct PeriodDisc {
    int64_t period = 2;
    std::vector<nn::Conv2d> convs;
    nn::Conv2d post;
  };
  struct SpectrogramDisc {
    int64_t resolution = 1024;
    std::vector<nn::Conv2d> convs;
    nn::Conv2d post;
  };

  DiscOutput run_period(const PeriodDisc& d, const ad::Var& wave) const;
  DiscOutput run_spectrogram(const SpectrogramDisc& d, const ad::Var& wave) const;

  std::vector<PeriodDisc> periods_;
  std::vector<SpectrogramDisc> resolutions_;
};

}  // namespace sfs
