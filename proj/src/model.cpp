// src/model.cpp
#include "sfs/model.h"

namespace sfs {

SvsModel::SvsModel(const Config& cfg, int64_t phoneme_vocab, int64_t note_vocab,
                   uint64_t init_seed)
    : cfg_(cfg), phoneme_vocab_(phoneme_vocab), note_vocab_(note_vocab),
      store_(init_seed) {
  cfg_.validate();
  prior_ = PriorEncoder(store_, "prior_encoder", cfg_.prior, phoneme_vocab,
                        note_vocab, cfg_.dsp.n_mcep, cfg_.source,
                        cfg_.dsp.stft.hop, !cfg_.train.no_am_source);
  posterior_ = PosteriorEncoder(store_, "posterior_encoder", cfg_.posterior,
                                cfg_.dsp.n_mcep, cfg_.prior.hidden);
  generator_ = Generator(store_, "generator", cfg_.generator, cfg_.prior.hidden,
                         cfg_.source, cfg_.dsp.stft.hop);
  disc_ = DiscriminatorSet(store_, "discriminator", cfg_.discriminator);
}

int64_t SvsModel::synthesis_param_count() const {
  return store_.count() - store_.count("discriminator.") -
         store_.count("posterior_encoder.");
}

}  // namespace sfs
