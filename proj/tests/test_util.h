// tests/test_util.h -- tiny configs and in-memory datasets for fast tests.
#pragma once

#include "sfs/config.h"
#include "sfs/dataset.h"
#include "sfs/demo.h"

namespace sfs::test {

// Small model sized for unit-test speed; same wiring as the full config.
inline Config tiny_config() {
  Config c;
  c.prior.hidden = 32;
  c.prior.filter = 64;
  c.prior.heads = 2;
  c.prior.encoder_blocks = 1;
  c.prior.acoustic_blocks = 1;
  c.prior.am_blocks = 1;
  c.prior.dropout = 0.1;
  c.posterior.layers = 2;
  c.posterior.hidden = 32;
  c.generator.hidden = 16;
  c.generator.resblock_kernels = {3};
  c.generator.resblock_dilations = {1, 3};
  c.discriminator.periods = {2, 3};
  c.discriminator.resolutions = {512};
  c.discriminator.channel_scale = 0.125;
  c.pitch.channel_scale = 0.25;
  c.train.batch_size = 1;
  c.train.segment_samples = 4096;
  c.train.weight_decay = 0.0;
  c.train.lr = 1e-4;
  return c;
}

// Builds a data::Dataset directly from synthetic utterances (no disk IO).
inline data::Dataset build_dataset(const std::vector<demo::DemoUtterance>& corpus,
                                   const dsp::DspConfig& cfg) {
  std::vector<score::ScoreEntry> entries;
  for (const auto& d : corpus) entries.push_back(d.entry);
  auto [pv, nv] = score::build_vocab(entries);

  data::Dataset ds;
  ds.phoneme_vocab = pv;
  ds.note_vocab = nv;
  ds.dsp_cfg = cfg;

  std::vector<dsp::AcousticFeatures> raw;
  for (const auto& d : corpus) raw.push_back(dsp::extract_features(d.wave, cfg));
  ds.stats = dsp::fit_norm_stats(raw);

  for (size_t i = 0; i < corpus.size(); ++i) {
    data::Utterance u;
    u.tokens = score::encode_entry(corpus[i].entry, pv, nv, cfg.stft.hop,
                                   cfg.sample_rate, raw[i].frames());
    u.features = raw[i];
    u.f0_hz.assign(u.features.log_f0.size(), 0.0);
    for (size_t t = 0; t < u.features.log_f0.size(); ++t)
      if (u.features.vuv[t]) u.f0_hz[t] = std::exp(u.features.log_f0[t]);
    dsp::apply_norm(u.features, ds.stats);
    u.wave = corpus[i].wave;
    u.wave.samples.resize(
        static_cast<size_t>(u.features.frames() * cfg.stft.hop));
    ds.utts.push_back(std::move(u));
  }
  return ds;
}

}  // namespace sfs::test
