// sfs/config.h -- hierarchical run configuration.
//
// One JSON file configures everything; any leaf key can be overridden from
// the command line as --section.key=value.
#pragma once

#include <string>
#include <vector>

#include "sfs/dsp.h"
#include "sfs/source.h"

namespace sfs {

struct PriorConfig {
  int64_t hidden = 192;
  int64_t filter = 768;
  int64_t heads = 2;
  int64_t encoder_blocks = 6;
  int64_t acoustic_blocks = 4;  // each of the F0 / mcep decoders
  int64_t am_blocks = 4;
  int64_t ffn_kernel = 3;
  int64_t duration_kernel = 3;
  double dropout = 0.1;
  int64_t midi_vocab = 129;  // MIDI 0..127 plus the rest marker at 0
};

struct PosteriorConfig {
  int64_t layers = 8;
  int64_t hidden = 192;
  int64_t kernel = 5;
};

struct GeneratorConfig {
  std::vector<int64_t> upsample_rates{8, 8, 4, 2};
  std::vector<int64_t> upsample_kernels{16, 16, 8, 4};
  int64_t hidden = 256;
  std::vector<int64_t> resblock_kernels{3, 7, 11};
  std::vector<int64_t> resblock_dilations{1, 3, 5};

  int64_t total_upsample() const {
    int64_t p = 1;
    for (int64_t u : upsample_rates) p *= u;
    return p;
  }
};

struct DiscriminatorConfig {
  std::vector<int64_t> periods{2, 3, 5, 7, 11};
  std::vector<int64_t> resolutions{512, 1024, 2048};
  double channel_scale = 1.0;  // scales all conv widths (desk presets shrink)
};

struct PitchNetConfig {
  int sample_rate = 16000;
  int64_t window = 1024;
  int64_t hop = 160;
  int64_t n_bins = 360;
  double channel_scale = 1.0;
};

struct LossWeights {
  double lambda1 = 1.0;      // LF0 term of the acoustic-model loss
  double lambda2 = 1.0;      // mcep term of the acoustic-model loss
  double lambda_mel = 45.0;
  double lambda_fm = 2.0;
  double lambda_f0 = 1.0;
  double lambda_mcep = 1.0;
};

struct TrainConfig {
  int64_t batch_size = 16;
  int64_t total_steps = 500000;
  double lr = 2e-4;
  double lr_decay = 0.999;  // per epoch
  double beta1 = 0.8;
  double beta2 = 0.99;
  double weight_decay = 0.01;
  double grad_clip = 5.0;
  int64_t segment_samples = 8192;
  uint64_t seed = 1234;
  int64_t log_every = 10;
  int64_t checkpoint_every = 1000;
  bool no_diff_recon = false;  // ablation: drop the differentiable F0/mcep losses
  bool no_am_source = false;   // ablation: no excitation input to the AM decoder
};

struct Config {
  dsp::DspConfig dsp;
  PriorConfig prior;
  PosteriorConfig posterior;
  GeneratorConfig generator;
  DiscriminatorConfig discriminator;
  source::SourceConfig source;
  PitchNetConfig pitch;
  LossWeights loss;
  TrainConfig train;

  void validate() const;

  std::string to_json() const;
  static Config from_json(const std::string& text);
  static Config load(const std::string& path);
  void save(const std::string& path) const;
  // --a.b.c=value style override
  void apply_override(const std::string& key, const std::string& value);
};

// CPU-scale preset: same wiring as the default (full) configuration with
// reduced widths/depths, sized so a 2000-step single-utterance run finishes
// in minutes. Mirrors configs/desk.json.
Config desk_config();

}  // namespace sfs
