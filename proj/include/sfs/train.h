// sfs/train.h -- training loop: total objective, alternating generator /
// discriminator updates, logging, checkpoints and inference.
#pragma once

#include <map>
#include <optional>
#include <string>

#include "sfs/dataset.h"
#include "sfs/losses.h"
#include "sfs/model.h"
#include "sfs/optim.h"
#include "sfs/pitch.h"

namespace sfs::train {

// Named scalar losses for one step. Terms disabled by ablation flags are
// absent from the map entirely.
struct LossBundle {
  std::map<std::string, double> values;

  double at(const std::string& k) const;
  bool has(const std::string& k) const { return values.count(k) != 0; }
  bool finite() const;
  // throws NonFiniteLoss naming the offending term
  void check_finite() const;
  std::string to_json(int64_t step) const;
};

class Trainer {
 public:
  Trainer(const Config& cfg, data::Dataset dataset, pitch::PitchNet pitch_net);

  // One optimization step: a discriminator update on L(D), then a
  // generator-side update on the full objective L.
  LossBundle train_step();

  // Runs `steps` steps, logging each bundle as JSONL (empty path: no log)
  // and checkpointing every cfg.train.checkpoint_every steps into out_dir.
  void run(int64_t steps, const std::string& out_dir,
           const std::string& log_path);

  // Inference with a locally seeded RNG, so equal (tokens, seed) always give
  // the same waveform. Ground-truth durations may be supplied (teacher-forced
  // evaluation); otherwise the duration predictor decides. noise_scale
  // scales the prior epsilon (0 = deterministic mean).
  Waveform synthesize(const score::ScoreTokens& tokens,
                      const std::vector<int64_t>* gt_durations = nullptr,
                      double noise_scale = 0.0, uint64_t seed = 0);

  void save_checkpoint(const std::string& path) const;
  void load_checkpoint(const std::string& path);

  SvsModel& model() { return model_; }
  const data::Dataset& dataset() const { return dataset_; }
  pitch::PitchNet& pitch_net() { return pitch_; }
  int64_t step_count() const { return step_; }
  Rng& rng() { return rng_; }

  // Builds a model checkpoint meta block (config + vocab + stats + step).
  std::string meta_json() const;

 private:
  LossBundle utterance_losses(const data::Utterance& utt, ad::Var* d_loss,
                              ad::Var* g_loss);

  Config cfg_;
  data::Dataset dataset_;
  pitch::PitchNet pitch_;
  SvsModel model_;
  optim::AdamW gen_opt_, disc_opt_;
  Rng rng_;
  int64_t step_ = 0;
  int64_t epoch_ = 0;
  std::vector<size_t> order_;
  size_t order_at_ = 0;
};

// Reconstructs a model for inference/eval from a checkpoint produced by
// save_checkpoint (vocabularies and norm stats ride in the meta block).
struct LoadedModelInit;

struct LoadedModel {
  Config cfg;
  score::Vocab phoneme_vocab, note_vocab;
  dsp::NormStats stats;
  int64_t step = 0;
  SvsModel model;

  explicit LoadedModel(const std::string& ckpt_path);
  Waveform synthesize(const score::ScoreTokens& tokens, uint64_t seed = 0,
                      const std::vector<int64_t>* gt_durations = nullptr);

 private:
  explicit LoadedModel(LoadedModelInit&& init);
};

}  // namespace sfs::train
