// src/prior.cpp
#include "sfs/prior.h"

#include <cmath>

namespace sfs {

PriorEncoder::PriorEncoder(nn::ParamStore& ps, const std::string& name,
                           const PriorConfig& cfg, int64_t phoneme_vocab,
                           int64_t note_vocab, int64_t mcep_dims,
                           const source::SourceConfig& source_cfg,
                           int64_t frame_hop, bool use_am_source)
    : cfg_(cfg), mcep_dims_(mcep_dims), frame_hop_(frame_hop),
      use_am_source_(use_am_source) {
  const int64_t h = cfg.hidden;
  phoneme_emb_ = nn::Embedding(ps, name + ".phoneme_emb", phoneme_vocab, h);
  note_emb_ = nn::Embedding(ps, name + ".note_emb", note_vocab, h);
  slur_emb_ = nn::Embedding(ps, name + ".slur_emb", 2, h);
  midi_emb_ = nn::Embedding(ps, name + ".midi_emb", cfg.midi_vocab, h);

  for (int64_t i = 0; i < cfg.encoder_blocks; ++i)
    encoder_blocks_.emplace_back(ps, name + ".enc" + std::to_string(i), h,
                                 cfg.filter, cfg.heads, cfg.ffn_kernel,
                                 cfg.dropout);
  dur_conv1_ = nn::Conv1d(ps, name + ".dur.conv1", h, h, cfg.duration_kernel);
  dur_conv2_ = nn::Conv1d(ps, name + ".dur.conv2", h, h, cfg.duration_kernel);
  dur_ln1_ = nn::LayerNorm(ps, name + ".dur.ln1", h);
  dur_ln2_ = nn::LayerNorm(ps, name + ".dur.ln2", h);
  dur_head_ = nn::Linear(ps, name + ".dur.head", h, 2);

  for (int64_t i = 0; i < cfg.acoustic_blocks; ++i) {
    f0_blocks_.emplace_back(ps, name + ".f0dec" + std::to_string(i), h,
                            cfg.filter, cfg.heads, cfg.ffn_kernel, cfg.dropout);
    mcep_blocks_.emplace_back(ps, name + ".mcepdec" + std::to_string(i), h,
                              cfg.filter, cfg.heads, cfg.ffn_kernel, cfg.dropout);
  }
  f0_head_ = nn::Linear(ps, name + ".f0_head", h, 1);
  mcep_head_ = nn::Linear(ps, name + ".mcep_head", h, mcep_dims);

  for (int64_t i = 0; i < cfg.am_blocks; ++i)
    am_blocks_.emplace_back(ps, name + ".amdec" + std::to_string(i), h,
                            cfg.filter, cfg.heads, cfg.ffn_kernel, cfg.dropout);
  const int64_t am_in = h + mcep_dims + (use_am_source ? 1 : 0);
  am_proj_ = nn::Linear(ps, name + ".am_proj", am_in, h);
  am_mean_ = nn::Linear(ps, name + ".am_mean", h, h);
  am_logvar_ = nn::Linear(ps, name + ".am_logvar", h, h);
  am_source_ = source::SourceModule(ps, name + ".am_source", source_cfg);
}

ad::Var PriorEncoder::encode_score(const std::vector<int64_t>& phoneme_ids,
                                   const std::vector<int64_t>& note_ids,
                                   const std::vector<int64_t>& slur_ids,
                                   int64_t valid_len,
                                   const nn::RunState& rs) const {
  const int64_t p = static_cast<int64_t>(phoneme_ids.size());
  if (static_cast<int64_t>(note_ids.size()) != p ||
      static_cast<int64_t>(slur_ids.size()) != p)
    throw ShapeMismatch("token id sequences must align");

  ad::Var h = ad::add(ad::add(phoneme_emb_.forward(phoneme_ids),
                              note_emb_.forward(note_ids)),
                      slur_emb_.forward(slur_ids));
  h = ad::add(h, ad::Var::constant(nn::sinusoidal_positions(p, cfg_.hidden)));
  if (valid_len >= 0) h = nn::mask_rows(h, valid_len);
  for (const auto& block : encoder_blocks_) h = block.forward(h, valid_len, rs);
  return h;
}

ad::Var PriorEncoder::predict_duration(const ad::Var& encoded,
                                       const nn::RunState& rs) const {
  ad::Var h = dur_ln1_.forward(ad::relu(dur_conv1_.forward(encoded)));
  if (rs.training && cfg_.dropout > 0.0)
    h = ad::dropout(h, cfg_.dropout, *rs.rng, true);
  h = dur_ln2_.forward(ad::relu(dur_conv2_.forward(h)));
  if (rs.training && cfg_.dropout > 0.0)
    h = ad::dropout(h, cfg_.dropout, *rs.rng, true);
  return dur_head_.forward(h);
}

ad::Var PriorEncoder::length_regulate(const ad::Var& hidden,
                                      const std::vector<int64_t>& durations) {
  if (static_cast<int64_t>(durations.size()) != hidden.val().rows())
    throw ShapeMismatch("one duration per phoneme row");
  std::vector<int64_t> idx;
  for (size_t i = 0; i < durations.size(); ++i) {
    if (durations[i] < 0)
      throw NegativeDuration("duration " + std::to_string(durations[i]) +
                             " at phoneme " + std::to_string(i));
    for (int64_t j = 0; j < durations[i]; ++j)
      idx.push_back(static_cast<int64_t>(i));
  }
  require(!idx.empty(), "length regulation produced zero frames");
  return ad::gather_rows(hidden, std::move(idx));
}

std::pair<ad::Var, ad::Var> PriorEncoder::decode_acoustics(
    const ad::Var& frame_hidden, const std::vector<int64_t>& frame_midi,
    const nn::RunState& rs) const {
  const int64_t t_frames = frame_hidden.val().rows();
  if (static_cast<int64_t>(frame_midi.size()) != t_frames)
    throw FrameMisalignment("frame-level midi must match hidden frames");

  ad::Var pos = ad::Var::constant(nn::sinusoidal_positions(t_frames, cfg_.hidden));

  ad::Var f0_h = ad::add(ad::add(frame_hidden, midi_emb_.forward(frame_midi)), pos);
  for (const auto& block : f0_blocks_) f0_h = block.forward(f0_h, -1, rs);
  ad::Var lf0 = f0_head_.forward(f0_h);

  ad::Var mc_h = ad::add(frame_hidden, pos);
  for (const auto& block : mcep_blocks_) mc_h = block.forward(mc_h, -1, rs);
  ad::Var mcep = mcep_head_.forward(mc_h);
  return {lf0, mcep};
}

LatentSequence PriorEncoder::prior_distribution(const ad::Var& frame_hidden,
                                                const ad::Var& mcep_pred,
                                                const ad::Var& am_excitation,
                                                const nn::RunState& rs) const {
  const int64_t t_frames = frame_hidden.val().rows();
  if (mcep_pred.val().rows() != t_frames)
    throw FrameMisalignment("mcep_pred frames != hidden frames");
  std::vector<ad::Var> parts{frame_hidden, mcep_pred};
  if (use_am_source_) {
    if (!am_excitation.defined() || am_excitation.val().rows() != t_frames)
      throw FrameMisalignment("am excitation frames != hidden frames");
    parts.push_back(am_excitation);
  }
  ad::Var h = am_proj_.forward(ad::concat_cols(parts));
  h = ad::add(h, ad::Var::constant(nn::sinusoidal_positions(t_frames, cfg_.hidden)));
  for (const auto& block : am_blocks_) h = block.forward(h, -1, rs);

  LatentSequence seq;
  seq.mean = am_mean_.forward(h);
  seq.log_var = am_logvar_.forward(h);
  return seq;
}

PriorForward PriorEncoder::forward(const score::ScoreTokens& tokens,
                                   const std::vector<int64_t>& durations,
                                   const std::vector<char>& frame_vuv,
                                   const dsp::NormStats& stats, Rng& rng,
                                   const nn::RunState& rs,
                                   bool random_phase) const {
  PriorForward out;
  out.encoded = encode_score(tokens.phoneme_ids, tokens.note_ids,
                             tokens.slur_ids, -1, rs);
  out.log_durations = predict_duration(out.encoded, rs);
  out.frame_hidden = length_regulate(out.encoded, durations);

  const int64_t t_frames = out.frame_hidden.val().rows();
  if (static_cast<int64_t>(frame_vuv.size()) != t_frames)
    throw FrameMisalignment("frame_vuv must cover the regulated frames");

  std::vector<int64_t> frame_midi;
  frame_midi.reserve(static_cast<size_t>(t_frames));
  for (size_t i = 0; i < durations.size(); ++i)
    for (int64_t j = 0; j < durations[i]; ++j)
      frame_midi.push_back(tokens.midi_ids[i]);

  auto [lf0, mcep] = decode_acoustics(out.frame_hidden, frame_midi, rs);
  out.lf0_pred = lf0;
  out.mcep_pred = mcep;

  ad::Var am_exc;
  if (use_am_source_) {
    // Hz track from the predicted LF0 (detached: the source sines are not a
    // gradient path), gated by the voicing mask.
    std::vector<double> f0_hz(static_cast<size_t>(t_frames), 0.0);
    for (int64_t t = 0; t < t_frames; ++t)
      if (frame_vuv[static_cast<size_t>(t)]) {
        const double lf0_raw =
            lf0.val().at(t, 0) * stats.lf0_std + stats.lf0_mean;
        f0_hz[static_cast<size_t>(t)] =
            std::clamp(std::exp(lf0_raw), 1.0, 4000.0);
      }
    am_exc = am_source_.frame_excitation(f0_hz, frame_hop_, rng, random_phase);
    out.am_excitation = am_exc;
  }
  out.prior = prior_distribution(out.frame_hidden, out.mcep_pred, am_exc, rs);
  return out;
}

std::vector<int64_t> PriorEncoder::durations_from_log(const Tensor& log_dur) {
  std::vector<int64_t> out;
  for (int64_t i = 0; i < log_dur.rows(); ++i) {
    const int64_t frames = std::llround(std::exp(log_dur.at(i, 0)) - 1.0);
    out.push_back(std::max<int64_t>(1, frames));
  }
  return out;
}

}  // namespace sfs
