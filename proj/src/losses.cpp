// src/losses.cpp
#include "sfs/losses.h"

#include <cmath>

namespace sfs::losses {

namespace {

// mask as [T,1] constant; empty mask means all ones
ad::Var mask_col(const std::vector<char>& mask, int64_t t_frames) {
  Tensor m({t_frames, 1});
  if (mask.empty()) {
    m.fill(1.0);
  } else {
    require(static_cast<int64_t>(mask.size()) == t_frames, "mask length");
    for (int64_t t = 0; t < t_frames; ++t)
      m.data[static_cast<size_t>(t)] = mask[static_cast<size_t>(t)] ? 1.0 : 0.0;
  }
  return ad::Var::constant(std::move(m));
}

double mask_count(const std::vector<char>& mask, int64_t t_frames) {
  if (mask.empty()) return static_cast<double>(t_frames);
  double n = 0.0;
  for (char c : mask) n += c ? 1.0 : 0.0;
  return n;
}

}  // namespace

Var masked_mse(const Var& pred, const Var& target, const std::vector<char>& mask) {
  if (!pred.val().same_shape(target.val()))
    throw ShapeMismatch("masked_mse: shapes differ");
  const int64_t t_frames = pred.val().rows();
  const double denom = mask_count(mask, t_frames) * static_cast<double>(pred.val().cols());
  if (denom <= 0.0) return ad::Var::constant(Tensor::scalar(0.0));
  Var sq = ad::square(ad::sub(pred, target));
  Var masked = ad::mul_colvec(sq, mask_col(mask, t_frames));
  return ad::smul(ad::sum_all(masked), 1.0 / denom);
}

Var masked_l1(const Var& pred, const Var& target, const std::vector<char>& mask) {
  if (!pred.val().same_shape(target.val()))
    throw ShapeMismatch("masked_l1: shapes differ");
  const int64_t t_frames = pred.val().rows();
  const double denom = mask_count(mask, t_frames) * static_cast<double>(pred.val().cols());
  if (denom <= 0.0) return ad::Var::constant(Tensor::scalar(0.0));
  Var diff = ad::abs_(ad::sub(pred, target));
  Var masked = ad::mul_colvec(diff, mask_col(mask, t_frames));
  return ad::smul(ad::sum_all(masked), 1.0 / denom);
}

Var am_loss(const Var& lf0_pred, const Var& mcep_pred, const Var& lf0_target,
            const Var& mcep_target, const std::vector<char>& voiced_mask,
            const std::vector<char>& frame_mask, double lambda1, double lambda2) {
  // LF0 MSE only counts frames that are both voiced and unpadded
  std::vector<char> lf0_mask = voiced_mask;
  if (!frame_mask.empty()) {
    require(frame_mask.size() == lf0_mask.size(), "mask lengths");
    for (size_t i = 0; i < lf0_mask.size(); ++i)
      lf0_mask[i] = lf0_mask[i] && frame_mask[i];
  }
  Var f0_term = masked_mse(lf0_pred, lf0_target, lf0_mask);
  Var mcep_term = masked_l1(mcep_pred, mcep_target, frame_mask);
  return ad::add(ad::smul(f0_term, lambda1), ad::smul(mcep_term, lambda2));
}

Var duration_loss(const Var& log_dur_pred,
                  const std::vector<int64_t>& phoneme_frames,
                  const std::vector<int64_t>& note_frames,
                  const std::vector<char>& mask) {
  const int64_t p = log_dur_pred.val().rows();
  if (log_dur_pred.val().cols() != 2 ||
      static_cast<int64_t>(phoneme_frames.size()) != p ||
      static_cast<int64_t>(note_frames.size()) != p)
    throw ShapeMismatch("duration predictor emits two heads per phoneme");
  Tensor target({p, 2});
  for (int64_t i = 0; i < p; ++i) {
    target.at(i, 0) = std::log(static_cast<double>(phoneme_frames[static_cast<size_t>(i)]) + 1.0);
    target.at(i, 1) = std::log(static_cast<double>(note_frames[static_cast<size_t>(i)]) + 1.0);
  }
  return masked_mse(log_dur_pred, ad::Var::constant(std::move(target)), mask);
}

Var kl_loss(const LatentSequence& posterior, const LatentSequence& prior,
            const std::vector<char>& frame_mask) {
  if (!posterior.mean.val().same_shape(prior.mean.val()) ||
      !posterior.log_var.val().same_shape(prior.log_var.val()) ||
      !posterior.mean.val().same_shape(posterior.log_var.val()))
    throw ShapeMismatch("kl_loss: distribution shapes differ");
  const int64_t t_frames = posterior.mean.val().rows();
  const int64_t dims = posterior.mean.val().cols();
  const double denom = mask_count(frame_mask, t_frames) * static_cast<double>(dims);
  if (denom <= 0.0) return ad::Var::constant(Tensor::scalar(0.0));

  Var dlv = ad::sub(posterior.log_var, prior.log_var);
  Var dmean = ad::sub(posterior.mean, prior.mean);
  // 0.5 * (exp(lq-lp) + (mq-mp)^2 exp(-lp) - 1 + lp - lq)
  Var term = ad::add(ad::exp_(dlv),
                     ad::mul(ad::square(dmean), ad::exp_(ad::neg(prior.log_var))));
  term = ad::sub(term, ad::sadd(dlv, 1.0));
  term = ad::smul(term, 0.5);
  Var masked = ad::mul_colvec(term, mask_col(frame_mask, t_frames));
  return ad::smul(ad::sum_all(masked), 1.0 / denom);
}

Var discriminator_loss(const std::vector<DiscOutput>& real,
                       const std::vector<DiscOutput>& fake) {
  if (real.size() != fake.size())
    throw StructureMismatch("sub-discriminator counts differ");
  Var total;
  for (size_t d = 0; d < real.size(); ++d) {
    Var real_term = ad::mean_all(ad::square(ad::sadd(real[d].score, -1.0)));
    Var fake_term = ad::mean_all(ad::square(fake[d].score));
    Var term = ad::add(real_term, fake_term);
    total = total.defined() ? ad::add(total, term) : term;
  }
  return total;
}

Var adversarial_loss(const std::vector<DiscOutput>& fake) {
  Var total;
  for (const DiscOutput& d : fake) {
    Var term = ad::mean_all(ad::square(ad::sadd(d.score, -1.0)));
    total = total.defined() ? ad::add(total, term) : term;
  }
  return total;
}

Var feature_matching_loss(const std::vector<DiscOutput>& real,
                          const std::vector<DiscOutput>& fake) {
  if (real.size() != fake.size())
    throw StructureMismatch("sub-discriminator counts differ");
  Var total;
  for (size_t d = 0; d < real.size(); ++d) {
    if (real[d].feats.size() != fake[d].feats.size())
      throw StructureMismatch("feature layer counts differ");
    for (size_t l = 0; l < real[d].feats.size(); ++l) {
      const Var& rf = real[d].feats[l];
      const Var& ff = fake[d].feats[l];
      if (!rf.val().same_shape(ff.val()))
        throw StructureMismatch("feature shapes differ at layer " + std::to_string(l));
      Var term = ad::mean_all(ad::abs_(ad::sub(ff, rf.detach())));
      total = total.defined() ? ad::add(total, term) : term;
    }
  }
  return total;
}

Var generator_loss(const Var& adv, const Var& mel, const Var& fm,
                   double lambda_mel, double lambda_fm) {
  return ad::add(adv, ad::add(ad::smul(mel, lambda_mel), ad::smul(fm, lambda_fm)));
}

Var mel_loss(const Var& y_hat, const Var& y, const dsp::DspConfig& cfg) {
  Var mel_hat = dsp::mel_spectrogram(y_hat, cfg);
  Var mel_ref = dsp::mel_spectrogram(y, cfg);
  return masked_l1(mel_hat, mel_ref.detach(), {});
}

Var f0_recon_loss(const Var& y_hat, const Var& y, int sample_rate,
                  const pitch::PitchNet& net, double lambda_f0,
                  const std::vector<char>& vuv_ref, int64_t frame_hop) {
  if (y_hat.val().numel() != y.val().numel())
    throw LengthMismatch("waveform lengths differ");
  const int target_rate = net.config().sample_rate;
  Var hat_rs = dsp::resample(ad::reshape(y_hat, {y_hat.val().numel()}),
                             sample_rate, target_rate);
  Var ref_rs = dsp::resample(ad::reshape(y.detach(), {y.val().numel()}),
                             sample_rate, target_rate);

  Var hat_probs = net.probabilities(hat_rs);
  Var ref_probs;
  {
    ad::NoGradGuard ng;
    ref_probs = net.probabilities(ref_rs);
  }
  const int64_t frames_hat = hat_probs.val().rows();
  const int64_t frames_ref = ref_probs.val().rows();
  if (std::llabs(frames_hat - frames_ref) > 1)
    throw LengthMismatch("pitch frame counts differ by more than one");
  const int64_t t_frames = std::min(frames_hat, frames_ref);

  Var f0_hat = pitch::decode_f0_weighted(ad::slice_rows(hat_probs, 0, t_frames),
                                         net.bins());
  Var f0_ref = pitch::decode_f0_weighted(ad::slice_rows(ref_probs, 0, t_frames),
                                         net.bins());

  // voicing mask from the reference track's analysis frames
  std::vector<char> mask;
  if (!vuv_ref.empty()) {
    mask.resize(static_cast<size_t>(t_frames), 0);
    for (int64_t t = 0; t < t_frames; ++t) {
      const double sec = static_cast<double>(t * net.config().hop) /
                         static_cast<double>(target_rate);
      const int64_t t44 = std::llround(sec * sample_rate / static_cast<double>(frame_hop));
      const int64_t clamped =
          std::min<int64_t>(static_cast<int64_t>(vuv_ref.size()) - 1,
                            std::max<int64_t>(0, t44));
      mask[static_cast<size_t>(t)] = vuv_ref[static_cast<size_t>(clamped)];
    }
  }
  return ad::smul(masked_mse(f0_hat, f0_ref.detach(), mask), lambda_f0);
}

Var mcep_recon_loss(const Var& y_hat, const Var& y, const dsp::DspConfig& cfg,
                    double lambda_mcep) {
  if (y_hat.val().numel() != y.val().numel())
    throw LengthMismatch("waveform lengths differ");
  Var mc_hat = dsp::extract_mcep(ad::reshape(y_hat, {y_hat.val().numel()}), cfg);
  Var mc_ref;
  {
    ad::NoGradGuard ng;
    mc_ref = dsp::extract_mcep(ad::reshape(y.detach(), {y.val().numel()}), cfg);
  }
  return ad::smul(masked_l1(mc_hat, mc_ref, {}), lambda_mcep);
}

}  // namespace sfs::losses
