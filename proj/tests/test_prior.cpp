// tests/test_prior.cpp
#include <doctest.h>

#include <cmath>

#include "gradcheck.h"
#include "sfs/losses.h"
#include "sfs/prior.h"
#include "test_util.h"

using namespace sfs;

namespace {

PriorEncoder make_prior(nn::ParamStore& ps, bool use_am_source = true) {
  Config c = test::tiny_config();
  source::SourceConfig src;
  return PriorEncoder(ps, "prior_encoder", c.prior, 12, 10, 80, src, 512,
                      use_am_source);
}

}  // namespace

TEST_CASE("encode_score: shape, determinism, padding mask") {
  nn::ParamStore ps(1);
  PriorEncoder prior = make_prior(ps);
  nn::RunState rs;  // eval

  std::vector<int64_t> ph = {1, 2, 3, 4}, nt = {1, 1, 2, 2}, sl = {0, 0, 1, 0};
  ad::Var enc = prior.encode_score(ph, nt, sl, -1, rs);
  CHECK(enc.val().rows() == 4);
  CHECK(enc.val().cols() == 32);

  ad::Var enc2 = prior.encode_score(ph, nt, sl, -1, rs);
  CHECK(enc.val().data == enc2.val().data);  // eval mode is deterministic

  // padded tail variations leave valid rows untouched
  std::vector<int64_t> ph_a = {1, 2, 3, 4, 0, 0}, ph_b = {1, 2, 3, 4, 5, 7};
  std::vector<int64_t> nt_p = {1, 1, 2, 2, 0, 3}, sl_p = {0, 0, 1, 0, 0, 1};
  ad::Var pa = prior.encode_score(ph_a, nt_p, sl_p, 4, rs);
  ad::Var pb = prior.encode_score(ph_b, nt_p, sl_p, 4, rs);
  for (int64_t t = 0; t < 4; ++t)
    for (int64_t c = 0; c < 32; ++c)
      CHECK(pa.val().at(t, c) == doctest::Approx(pb.val().at(t, c)).epsilon(1e-12));
}

TEST_CASE("length regulator: definition, identity, zero durations") {
  Tensor rows({3, 2}, {1, 1, 2, 2, 3, 3});
  ad::Var h = ad::Var::constant(rows);

  ad::Var out = PriorEncoder::length_regulate(h, {2, 1, 3});
  CHECK(out.val().rows() == 6);
  const std::vector<double> expect = {1, 1, 1, 1, 2, 2, 3, 3, 3, 3, 3, 3};
  CHECK(out.val().data == expect);

  ad::Var ident = PriorEncoder::length_regulate(h, {1, 1, 1});
  CHECK(ident.val().data == rows.data);

  ad::Var dropped = PriorEncoder::length_regulate(h, {2, 0, 1});
  CHECK(dropped.val().rows() == 3);
  CHECK(dropped.val().data == std::vector<double>{1, 1, 1, 1, 3, 3});

  CHECK_THROWS_AS(PriorEncoder::length_regulate(h, {1, -2, 1}), NegativeDuration);

  // sum property on random vectors
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int64_t> durations;
    int64_t total = 0;
    for (int i = 0; i < 3; ++i) {
      durations.push_back(rng.randint(0, 7));
      total += durations.back();
    }
    if (total == 0) durations[0] = total = 1;
    CHECK(PriorEncoder::length_regulate(h, durations).val().rows() == total);
  }
}

TEST_CASE("duration loss: identities and inference rounding") {
  // perfect predictions -> 0
  std::vector<int64_t> ph_frames = {10, 20, 30}, nt_frames = {12, 18, 30};
  Tensor pred({3, 2});
  for (int64_t i = 0; i < 3; ++i) {
    pred.at(i, 0) = std::log(static_cast<double>(ph_frames[static_cast<size_t>(i)]) + 1.0);
    pred.at(i, 1) = std::log(static_cast<double>(nt_frames[static_cast<size_t>(i)]) + 1.0);
  }
  CHECK(losses::duration_loss(ad::Var::constant(pred), ph_frames, nt_frames, {}).item() ==
        doctest::Approx(0.0).epsilon(1e-15));

  // constant offset delta in log space -> delta^2
  Tensor off = pred;
  for (double& v : off.data) v += 0.3;
  CHECK(losses::duration_loss(ad::Var::constant(off), ph_frames, nt_frames, {}).item() ==
        doctest::Approx(0.09).epsilon(1e-12));

  // log-duration 3.0 -> round(e^3 - 1) = 19 frames
  Tensor three({1, 2}, {3.0, 3.0});
  CHECK(PriorEncoder::durations_from_log(three) == std::vector<int64_t>{19});
  // very negative prediction clamps to 1 frame
  Tensor tiny({1, 2}, {-4.0, -4.0});
  CHECK(PriorEncoder::durations_from_log(tiny) == std::vector<int64_t>{1});
}

TEST_CASE("am loss: arithmetic identities and voiced masking") {
  Rng rng(10);
  const int64_t t_frames = 6;
  Tensor lf0 = test::random_tensor({t_frames, 1}, rng);
  Tensor mcep = test::random_tensor({t_frames, 80}, rng);
  std::vector<char> voiced(t_frames, 1);

  auto c = [](const Tensor& t) { return ad::Var::constant(t); };

  // targets == predictions -> 0
  CHECK(losses::am_loss(c(lf0), c(mcep), c(lf0), c(mcep), voiced, {}, 1, 1).item() ==
        doctest::Approx(0.0));

  // LF0 off by 2 everywhere, mcep exact, lambda1 = 1 -> 4
  Tensor lf0_off = lf0;
  for (double& v : lf0_off.data) v += 2.0;
  CHECK(losses::am_loss(c(lf0_off), c(mcep), c(lf0), c(mcep), voiced, {}, 1, 1).item() ==
        doctest::Approx(4.0).epsilon(1e-12));

  // mcep off by +1 in every entry, LF0 exact, lambda2 = 1 -> 1
  Tensor mcep_off = mcep;
  for (double& v : mcep_off.data) v += 1.0;
  CHECK(losses::am_loss(c(lf0), c(mcep_off), c(lf0), c(mcep), voiced, {}, 1, 1).item() ==
        doctest::Approx(1.0).epsilon(1e-12));

  // unvoiced frames contribute nothing to the LF0 term
  std::vector<char> partial = {1, 0, 1, 0, 1, 0};
  Tensor lf0_bad = lf0;
  lf0_bad.at(1, 0) += 100.0;
  lf0_bad.at(3, 0) -= 50.0;
  CHECK(losses::am_loss(c(lf0_bad), c(mcep), c(lf0), c(mcep), partial, {}, 1, 1).item() ==
        doctest::Approx(0.0).epsilon(1e-12));

  // weights scale their own terms
  CHECK(losses::am_loss(c(lf0_off), c(mcep_off), c(lf0), c(mcep), voiced, {}, 0.5, 2.0).item() ==
        doctest::Approx(0.5 * 4.0 + 2.0 * 1.0).epsilon(1e-12));
}

TEST_CASE("decode_acoustics and prior_distribution: shapes, reachability") {
  nn::ParamStore ps(2);
  PriorEncoder prior = make_prior(ps);
  nn::RunState rs;
  Rng rng(11);

  std::vector<int64_t> ph = {1, 2, 3}, nt = {1, 2, 2}, sl = {0, 0, 0};
  ad::Var enc = prior.encode_score(ph, nt, sl, -1, rs);
  std::vector<int64_t> durations = {3, 2, 4};
  ad::Var frames = PriorEncoder::length_regulate(enc, durations);
  CHECK(frames.val().rows() == 9);

  std::vector<int64_t> midi = {60, 60, 60, 64, 64, 67, 67, 67, 67};
  auto [lf0, mcep] = prior.decode_acoustics(frames, midi, rs);
  CHECK(lf0.val().rows() == 9);
  CHECK(lf0.val().cols() == 1);
  CHECK(mcep.val().rows() == 9);
  CHECK(mcep.val().cols() == 80);

  std::vector<double> f0_hz(9, 220.0);
  ad::Var exc = prior.am_source().frame_excitation(f0_hz, 512, rng, true);
  LatentSequence p = prior.prior_distribution(frames, mcep, exc, rs);
  CHECK(p.mean.val().rows() == 9);
  CHECK(p.mean.val().cols() == 32);
  CHECK(p.log_var.val().rows() == 9);

  // with eps = 0, z == mean
  p.sample(rng, 0.0);
  CHECK(p.z.val().data == p.mean.val().data);

  // gradient of |z|^2 reaches mcep_pred and the score embeddings
  p.sample(rng, 1.0);
  ad::Var norm = ad::sum_all(ad::square(p.z));
  ad::backward(norm);
  CHECK(mcep.has_grad());
  double g = 0.0;
  for (double v : mcep.grad().data) g += v * v;
  CHECK(g > 0.0);
  ad::Var phoneme_w = ps.get("prior_encoder.phoneme_emb.w");
  CHECK(phoneme_w.has_grad());

  // frame-misaligned conditioning is rejected
  ad::Var bad_exc = prior.am_source().frame_excitation({220.0, 220.0}, 512, rng, true);
  CHECK_THROWS_AS(prior.prior_distribution(frames, mcep, bad_exc, rs),
                  FrameMisalignment);
}

TEST_CASE("full prior forward: gradients reach embeddings through L_am") {
  nn::ParamStore ps(4);
  PriorEncoder prior = make_prior(ps);
  nn::RunState rs;
  Rng rng(12);

  score::ScoreTokens tokens;
  tokens.phoneme_ids = {1, 2, 3};
  tokens.note_ids = {1, 2, 2};
  tokens.midi_ids = {60, 64, 67};
  tokens.slur_ids = {0, 0, 0};
  tokens.duration_frames = {3, 3, 3};
  tokens.note_duration_frames = {3, 3, 3};

  dsp::NormStats stats;
  stats.mcep_mean.assign(80, 0.0);
  stats.mcep_std.assign(80, 1.0);
  stats.lf0_mean = 5.0;
  stats.lf0_std = 0.5;

  std::vector<char> vuv(9, 1);
  PriorForward pf = prior.forward(tokens, tokens.duration_frames, vuv, stats,
                                  rng, rs, true);
  CHECK(pf.prior.mean.val().rows() == 9);
  CHECK(pf.am_excitation.val().rows() == 9);

  Tensor lf0_t = test::random_tensor({9, 1}, rng);
  Tensor mcep_t = test::random_tensor({9, 80}, rng);
  ad::Var loss = losses::am_loss(pf.lf0_pred, pf.mcep_pred,
                                 ad::Var::constant(lf0_t),
                                 ad::Var::constant(mcep_t), vuv, {}, 1.0, 1.0);
  ad::backward(loss);
  ad::Var emb = ps.get("prior_encoder.phoneme_emb.w");
  REQUIRE(emb.has_grad());
  double g = 0.0;
  for (double v : emb.grad().data) g += v * v;
  CHECK(g > 0.0);
}

TEST_CASE("duration loss reaches the score embeddings") {
  nn::ParamStore ps(7);
  PriorEncoder prior = make_prior(ps);
  nn::RunState rs;

  ad::Var enc = prior.encode_score({1, 2, 3}, {1, 2, 2}, {0, 0, 0}, -1, rs);
  ad::Var log_dur = prior.predict_duration(enc, rs);
  ad::Var loss = losses::duration_loss(log_dur, {10, 20, 15}, {12, 20, 14}, {});
  ad::backward(loss);
  ad::Var emb = ps.get("prior_encoder.phoneme_emb.w");
  REQUIRE(emb.has_grad());
  double g = 0.0;
  for (double v : emb.grad().data) g += v * v;
  CHECK(g > 0.0);
}

TEST_CASE("no-am-source ablation shrinks the AM projection input") {
  nn::ParamStore with(5), without(6);
  PriorEncoder a = make_prior(with, true);
  PriorEncoder b = make_prior(without, false);
  const auto& wa = with.get("prior_encoder.am_proj.w").val();
  const auto& wb = without.get("prior_encoder.am_proj.w").val();
  CHECK(wa.cols() == wb.cols() + 1);  // excitation contributes one channel
}
