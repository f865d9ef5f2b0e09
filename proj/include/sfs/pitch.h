// sfs/pitch.h -- differentiable F0 re-extraction from raw 16 kHz audio.
//
// A small convolutional classifier over 20-cent pitch bins; decoding takes
// the probability-weighted mean in cent space instead of argmax/Viterbi so
// gradients reach the input waveform. Weights are trained on synthetic
// harmonic tones and frozen during synthesis training.
#pragma once

#include "sfs/config.h"
#include "sfs/nn.h"

namespace sfs::pitch {

using ad::Var;

struct PitchBins {
  int64_t n_bins = 360;
  std::vector<double> cents;       // 20-cent grid from C1 (32.70 Hz)
  std::vector<double> center_hz;

  static PitchBins make(int64_t n_bins = 360);
};

// Expectation over bins in cent space, converted to Hz. Rows must sum to 1.
Var decode_f0_weighted(const Var& probs, const PitchBins& bins);

class PitchNet {
 public:
  explicit PitchNet(const PitchNetConfig& cfg, uint64_t init_seed = 7);

  // Per-frame softmax over bins: [num_frames, n_bins]. The input must be a
  // 16 kHz signal of at least one analysis window.
  Var probabilities(const Var& wave16k) const;
  Var probabilities(const Var& wave16k, int sample_rate) const;

  int64_t num_frames(int64_t samples) const {
    return samples / cfg_.hop + 1;
  }

  const PitchNetConfig& config() const { return cfg_; }
  const PitchBins& bins() const { return bins_; }
  nn::ParamStore& store() { return store_; }
  const nn::ParamStore& store() const { return store_; }

  // Frozen nets never receive gradients (requires_grad off on every weight).
  void set_frozen(bool frozen);
  bool frozen() const { return frozen_; }

  void save(const std::string& path) const;
  void load(const std::string& path);

 private:
  PitchNetConfig cfg_;
  PitchBins bins_;
  nn::ParamStore store_;
  std::vector<nn::Conv1d> convs_;
  std::vector<nn::LayerNorm> norms_;
  nn::Linear head_;
  bool frozen_ = false;
};

// Synthetic harmonic tone at a known F0 (random harmonic amplitudes and
// phases, additive noise at snr_db), used for pretraining and evaluation.
std::vector<double> synth_tone(double f0_hz, int64_t n_samples, int sample_rate,
                               Rng& rng, double snr_db);

struct PretrainReport {
  double final_loss = 0.0;
  double heldout_within_50c = 0.0;  // fraction of held-out frames within 50 cents
};

// Trains the net on n_tones synthetic tones (log-uniform F0 in [f_lo, f_hi])
// against cent-smeared targets, then evaluates weighted-sum decoding on a
// held-out set.
PretrainReport pretrain(PitchNet& net, int64_t n_tones, int64_t epochs,
                        double lr, uint64_t seed, double f_lo = 55.0,
                        double f_hi = 1000.0, int64_t batch = 32,
                        bool verbose = false);

}  // namespace sfs::pitch
