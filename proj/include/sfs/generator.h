// sfs/generator.h -- waveform decoder: upsampling stacks with residual
// blocks, fed by the latent sequence and fused at every scale with the
// F0-driven source excitation.
#pragma once

#include "sfs/config.h"
#include "sfs/nn.h"
#include "sfs/source.h"

namespace sfs {

class Generator {
 public:
  Generator() = default;
  Generator(nn::ParamStore& ps, const std::string& name,
            const GeneratorConfig& cfg, int64_t latent_dim,
            const source::SourceConfig& source_cfg, int64_t frame_hop);

  // z [T, latent] + frame-level F0 (Hz) -> waveform [T * hop, 1] in [-1, 1].
  ad::Var forward(const ad::Var& z, const std::vector<double>& frame_f0,
                  Rng& rng, bool random_phase) const;

  // Same, but with the excitation path silenced (ablation probes).
  ad::Var forward_with_excitation(const ad::Var& z, const ad::Var& sample_excitation) const;

  ad::Var sample_excitation(const std::vector<double>& frame_f0, Rng& rng,
                            bool random_phase) const;

  const source::SourceModule& source() const { return source_; }
  int64_t frame_hop() const { return hop_; }

 private:
  struct ResBlock {
    std::vector<nn::Conv1d> dilated, plain;
    ad::Var forward(const ad::Var& x) const;
  };

  GeneratorConfig cfg_;
  int64_t hop_ = 512;
  source::SourceModule source_;
  nn::Conv1d pre_, post_;
  std::vector<nn::ConvTranspose1d> ups_;
  std::vector<nn::Conv1d> fuse_;
  std::vector<std::vector<ResBlock>> resblocks_;  // [stage][kernel]
};

}  // namespace sfs
