// sfs/source.h -- F0-driven sinusoidal excitation with harmonic branches.
//
// Voiced steps produce alpha*sin(cumulative phase of (b+1)*f) + noise per
// branch b; unvoiced steps produce scaled noise with std 1/3. The phase
// accumulator runs over the whole sequence, so voicing gaps freeze the phase
// instead of resetting it. A trainable feed-forward layer merges branches.
#pragma once

#include "sfs/autodiff.h"
#include "sfs/nn.h"

namespace sfs::source {

using ad::Var;

struct SourceConfig {
  double alpha = 0.1;       // sine amplitude
  double sigma = 0.003;     // additive noise std
  int64_t n_harmonics = 7;  // overtone branches beyond the fundamental
  int sample_rate = 44100;

  int64_t branches() const { return n_harmonics + 1; }
  void validate() const {
    require(alpha > 0.0 && sigma > 0.0 && n_harmonics >= 0, "valid source config");
  }
};

struct ExcitationSignal {
  Tensor branches;  // [T, n_harmonics+1]
  Tensor merged;    // [T, 1]
  double rate = 0.0;
};

// Branch excitations for a per-step F0 sequence (Hz, 0 = unvoiced).
// phase_seed < 0 draws random initial phases per branch; otherwise phases
// are fixed to 0 (inference reproducibility).
Tensor generate_excitation(const std::vector<double>& f0, const SourceConfig& cfg,
                           Rng& rng, bool random_phase);

// Frame-level F0 -> sample-level: linear interpolation between voiced frame
// centers, held at voicing boundaries, zeros kept hard (never interpolated).
std::vector<double> upsample_f0(const std::vector<double>& frame_f0, int64_t hop);

// Trainable merge of excitation branches, one per call site (the acoustic
// model and the waveform decoder keep independent weights).
class SourceModule {
 public:
  SourceModule() = default;
  SourceModule(nn::ParamStore& ps, const std::string& name, SourceConfig cfg);

  const SourceConfig& config() const { return cfg_; }

  // tanh(w . branches + b): [T, branches] -> [T, 1]
  Var merge(const Var& branches) const;

  // Sample-level merged excitation for a sample-level F0 track.
  Var sample_excitation(const std::vector<double>& sample_f0, Rng& rng,
                        bool random_phase) const;

  // Plain-value rendering (no tape): branches plus merged signal.
  ExcitationSignal render(const std::vector<double>& sample_f0, double rate,
                          Rng& rng, bool random_phase) const;

  // AM-path excitation: sample-level synthesis pooled back to frame rate.
  Var frame_excitation(const std::vector<double>& frame_f0, int64_t hop,
                       Rng& rng, bool random_phase) const;

  nn::Linear& merge_layer() { return merge_; }

 private:
  SourceConfig cfg_;
  nn::Linear merge_;
};

}  // namespace sfs::source
