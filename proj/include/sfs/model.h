// sfs/model.h -- the full synthesis model: prior + posterior encoders,
// waveform generator and discriminator set over one parameter store.
#pragma once

#include "sfs/config.h"
#include "sfs/discriminator.h"
#include "sfs/generator.h"
#include "sfs/posterior.h"
#include "sfs/prior.h"

namespace sfs {

class SvsModel {
 public:
  SvsModel(const Config& cfg, int64_t phoneme_vocab, int64_t note_vocab,
           uint64_t init_seed);

  nn::ParamStore& store() { return store_; }
  const nn::ParamStore& store() const { return store_; }
  PriorEncoder& prior() { return prior_; }
  const PriorEncoder& prior() const { return prior_; }
  PosteriorEncoder& posterior() { return posterior_; }
  Generator& generator() { return generator_; }
  const Generator& generator() const { return generator_; }
  DiscriminatorSet& discriminator() { return disc_; }
  const Config& config() const { return cfg_; }

  // Parameters on the synthesis path: everything used at inference time
  // (score encoder through waveform generator). The posterior encoder and
  // the discriminators only exist for training and are excluded.
  int64_t synthesis_param_count() const;

  int64_t phoneme_vocab() const { return phoneme_vocab_; }
  int64_t note_vocab() const { return note_vocab_; }

 private:
  Config cfg_;
  int64_t phoneme_vocab_ = 0, note_vocab_ = 0;
  nn::ParamStore store_;
  PriorEncoder prior_;
  PosteriorEncoder posterior_;
  Generator generator_;
  DiscriminatorSet disc_;
};

}  // namespace sfs
