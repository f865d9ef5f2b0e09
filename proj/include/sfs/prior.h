// sfs/prior.h -- music-score prior: score encoder, duration predictor,
// length regulator, F0/mcep acoustic decoders, AM source conditioning and
// the AM decoder producing the frame-level prior distribution.
#pragma once

#include "sfs/config.h"
#include "sfs/latent.h"
#include "sfs/nn.h"
#include "sfs/score.h"
#include "sfs/source.h"

namespace sfs {

struct PriorForward {
  ad::Var encoded;        // [P, hidden] phoneme-level
  ad::Var log_durations;  // [P, 2]: phoneme head, note head (log(frames+1))
  ad::Var frame_hidden;   // [T, hidden]
  ad::Var lf0_pred;       // [T, 1] normalized log-F0
  ad::Var mcep_pred;      // [T, mcep] normalized
  ad::Var am_excitation;  // [T, 1] (undefined under the no-am-source ablation)
  LatentSequence prior;   // mean / log_var (z unsampled)
};

class PriorEncoder {
 public:
  PriorEncoder() = default;
  PriorEncoder(nn::ParamStore& ps, const std::string& name,
               const PriorConfig& cfg, int64_t phoneme_vocab,
               int64_t note_vocab, int64_t mcep_dims,
               const source::SourceConfig& source_cfg, int64_t frame_hop,
               bool use_am_source);

  // Phoneme-level encoding; valid_len < 0 means no padding.
  ad::Var encode_score(const std::vector<int64_t>& phoneme_ids,
                       const std::vector<int64_t>& note_ids,
                       const std::vector<int64_t>& slur_ids, int64_t valid_len,
                       const nn::RunState& rs) const;

  // Two regression heads over log(frames + 1).
  ad::Var predict_duration(const ad::Var& encoded, const nn::RunState& rs) const;

  // Repeat phoneme rows by their frame durations; zero durations drop rows.
  static ad::Var length_regulate(const ad::Var& hidden,
                                 const std::vector<int64_t>& durations);

  // (LF0_pred [T,1], Mcep_pred [T,mcep]); the F0 decoder sees the note-MIDI
  // embedding so the pitch prior stays note-aware.
  std::pair<ad::Var, ad::Var> decode_acoustics(
      const ad::Var& frame_hidden, const std::vector<int64_t>& frame_midi,
      const nn::RunState& rs) const;

  // AM decoder over [frame_hidden | mcep_pred | excitation] -> mean/log_var.
  LatentSequence prior_distribution(const ad::Var& frame_hidden,
                                    const ad::Var& mcep_pred,
                                    const ad::Var& am_excitation,
                                    const nn::RunState& rs) const;

  // Full prior path. Durations select teacher forcing (ground truth) or the
  // duration predictor's output (inference). The excitation F0 comes from
  // the predicted LF0, denormalized and gated by frame_vuv.
  PriorForward forward(const score::ScoreTokens& tokens,
                       const std::vector<int64_t>& durations,
                       const std::vector<char>& frame_vuv,
                       const dsp::NormStats& stats, Rng& rng,
                       const nn::RunState& rs, bool random_phase) const;

  // round(exp(d) - 1), clamped to at least 1 frame per phoneme.
  static std::vector<int64_t> durations_from_log(const Tensor& log_dur);

  const source::SourceModule& am_source() const { return am_source_; }
  bool uses_am_source() const { return use_am_source_; }
  int64_t hidden() const { return cfg_.hidden; }

 private:
  PriorConfig cfg_;
  int64_t mcep_dims_ = 0;
  int64_t frame_hop_ = 512;
  bool use_am_source_ = true;
  nn::Embedding phoneme_emb_, note_emb_, slur_emb_, midi_emb_;
  std::vector<nn::FftBlock> encoder_blocks_;
  nn::Conv1d dur_conv1_, dur_conv2_;
  nn::LayerNorm dur_ln1_, dur_ln2_;
  nn::Linear dur_head_;
  std::vector<nn::FftBlock> f0_blocks_, mcep_blocks_, am_blocks_;
  nn::Linear f0_head_, mcep_head_;
  nn::Linear am_proj_;
  nn::Linear am_mean_, am_logvar_;
  source::SourceModule am_source_;
};

}  // namespace sfs
