// sfs/losses.h -- every training objective term.
//
// Masks are column vectors of 0/1 (or empty for "all frames"); masked frames
// contribute exactly zero and are excluded from the averaging denominator.
#pragma once

#include "sfs/discriminator.h"
#include "sfs/dsp.h"
#include "sfs/latent.h"
#include "sfs/pitch.h"

namespace sfs::losses {

using ad::Var;

Var masked_mse(const Var& pred, const Var& target, const std::vector<char>& mask);
Var masked_l1(const Var& pred, const Var& target, const std::vector<char>& mask);

// lambda1 * MSE(LF0, LF0_pred) over voiced frames
//   + lambda2 * mean L1(Mcep, Mcep_pred) over unpadded frames.
Var am_loss(const Var& lf0_pred, const Var& mcep_pred, const Var& lf0_target,
            const Var& mcep_target, const std::vector<char>& voiced_mask,
            const std::vector<char>& frame_mask, double lambda1, double lambda2);

// Mean of the two heads' MSEs in log(frames + 1) space.
Var duration_loss(const Var& log_dur_pred,
                  const std::vector<int64_t>& phoneme_frames,
                  const std::vector<int64_t>& note_frames,
                  const std::vector<char>& mask);

// Closed-form KL(q || p) between diagonal Gaussians, averaged over unmasked
// frames and dimensions.
Var kl_loss(const LatentSequence& posterior, const LatentSequence& prior,
            const std::vector<char>& frame_mask);

// Least-squares GAN objectives, summed over sub-discriminators with
// per-element means inside.
Var discriminator_loss(const std::vector<DiscOutput>& real,
                       const std::vector<DiscOutput>& fake);
Var adversarial_loss(const std::vector<DiscOutput>& fake);
// Per-layer L1 feature distances averaged by element count, summed over
// layers and sub-discriminators.
Var feature_matching_loss(const std::vector<DiscOutput>& real,
                          const std::vector<DiscOutput>& fake);

// L_G = L_adv(G) + lambda_mel * L_mel + lambda_fm * L_fm(G)
Var generator_loss(const Var& adv, const Var& mel, const Var& fm,
                   double lambda_mel, double lambda_fm);

// Mean L1 between log-mel spectrograms.
Var mel_loss(const Var& y_hat, const Var& y, const dsp::DspConfig& cfg);

// Resample both waves to the pitch net's rate, decode F0 by weighted sum,
// MSE in Hz over frames voiced in the reference track. Gradients reach only
// y_hat; the reference branch and the pitch weights stay fixed.
Var f0_recon_loss(const Var& y_hat, const Var& y, int sample_rate,
                  const pitch::PitchNet& net, double lambda_f0,
                  const std::vector<char>& vuv_ref, int64_t frame_hop);

// Mean L1 between warped cepstra of the two waves (no resampling).
Var mcep_recon_loss(const Var& y_hat, const Var& y, const dsp::DspConfig& cfg,
                    double lambda_mcep);

}  // namespace sfs::losses
