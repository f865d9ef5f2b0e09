// tests/test_pitch.cpp
#include <doctest.h>

#include <cmath>

#include "gradcheck.h"
#include "sfs/pitch.h"

using namespace sfs;
using pitch::PitchBins;
using pitch::PitchNet;

TEST_CASE("pitch bins: geometric 20-cent grid from C1") {
  PitchBins bins = PitchBins::make();
  CHECK(bins.n_bins == 360);
  CHECK(bins.center_hz.front() == doctest::Approx(32.70319566).epsilon(1e-9));
  const double ratio = std::exp2(20.0 / 1200.0);
  for (int64_t k = 1; k < bins.n_bins; ++k) {
    CHECK(bins.center_hz[static_cast<size_t>(k)] >
          bins.center_hz[static_cast<size_t>(k - 1)]);
    CHECK(bins.center_hz[static_cast<size_t>(k)] /
              bins.center_hz[static_cast<size_t>(k - 1)] ==
          doctest::Approx(ratio).epsilon(1e-9));
  }
}

TEST_CASE("weighted decoding: one-hot, uniform, two-bin midpoint") {
  PitchBins bins = PitchBins::make();

  // one-hot at bin k -> exactly bin k's center
  for (int64_t k : {0L, 77L, 200L, 359L}) {
    Tensor p({1, 360});
    p.data[static_cast<size_t>(k)] = 1.0;
    ad::Var hz = pitch::decode_f0_weighted(ad::Var::constant(p), bins);
    CHECK(hz.val().data[0] ==
          doctest::Approx(bins.center_hz[static_cast<size_t>(k)]).epsilon(1e-12));
  }

  // uniform -> Hz of the mean cent (geometric mean of the extreme centers)
  Tensor u = Tensor::full({1, 360}, 1.0 / 360.0);
  ad::Var hz_u = pitch::decode_f0_weighted(ad::Var::constant(u), bins);
  const double mean_cents = (bins.cents.front() + bins.cents.back()) / 2.0;
  CHECK(hz_u.val().data[0] == doctest::Approx(cents_to_hz(mean_cents)).epsilon(1e-9));

  // 50/50 on adjacent bins -> midpoint cent == geometric mean of centers
  Tensor two({1, 360});
  two.data[100] = 0.5;
  two.data[101] = 0.5;
  ad::Var hz_two = pitch::decode_f0_weighted(ad::Var::constant(two), bins);
  const double geo = std::sqrt(bins.center_hz[100] * bins.center_hz[101]);
  CHECK(hz_two.val().data[0] == doctest::Approx(geo).epsilon(1e-9));

  // shifting a one-hot by k bins scales Hz by 2^(20k/1200)
  Tensor a({1, 360}), b({1, 360});
  a.data[50] = 1.0;
  b.data[57] = 1.0;
  const double fa = pitch::decode_f0_weighted(ad::Var::constant(a), bins).val().data[0];
  const double fb = pitch::decode_f0_weighted(ad::Var::constant(b), bins).val().data[0];
  CHECK(fb / fa == doctest::Approx(std::exp2(20.0 * 7.0 / 1200.0)).epsilon(1e-9));

  // unnormalized rows are rejected
  Tensor bad = Tensor::full({1, 360}, 0.01);
  CHECK_THROWS_AS(pitch::decode_f0_weighted(ad::Var::constant(bad), bins),
                  NotNormalized);
}

TEST_CASE("pitch net: softmax rows, gradient reachability, input checks") {
  PitchNetConfig cfg;
  cfg.channel_scale = 0.25;
  PitchNet net(cfg, 11);

  Rng rng(3);
  Tensor wave = test::random_tensor({2000}, rng, -0.5, 0.5);
  ad::Var w = ad::Var::leaf(wave, true);
  ad::Var probs = net.probabilities(w);
  CHECK(probs.val().rows() == 2000 / 160 + 1);
  CHECK(probs.val().cols() == 360);
  for (int64_t t = 0; t < probs.val().rows(); ++t) {
    double s = 0.0;
    for (int64_t k = 0; k < 360; ++k) s += probs.val().at(t, k);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
  }

  // gradients reach the input waveform through decode + probabilities
  ad::Var hz = pitch::decode_f0_weighted(probs, net.bins());
  ad::backward(ad::sum_all(hz));
  REQUIRE(w.has_grad());
  double g = 0.0;
  for (double v : w.grad().data) g += v * v;
  CHECK(g > 0.0);
  CHECK(std::isfinite(g));

  Tensor tiny = test::random_tensor({500}, rng);
  CHECK_THROWS_AS(net.probabilities(ad::Var::constant(tiny)), TooShortSignal);
  CHECK_THROWS_AS(net.probabilities(ad::Var::constant(wave), 44100),
                  WrongSampleRate);
}

TEST_CASE("pitch net: frozen store never accumulates gradients") {
  PitchNetConfig cfg;
  cfg.channel_scale = 0.25;
  PitchNet net(cfg, 12);
  net.set_frozen(true);

  Rng rng(4);
  Tensor wave = test::random_tensor({1500}, rng, -0.5, 0.5);
  ad::Var w = ad::Var::leaf(wave, true);
  ad::Var probs = net.probabilities(w);
  ad::backward(ad::sum_all(pitch::decode_f0_weighted(probs, net.bins())));
  CHECK(w.has_grad());  // input still reachable
  for (const auto& [name, p] : net.store().params())
    CHECK_FALSE(p.has_grad());
}

TEST_CASE("pitch net: short pretraining improves the loss") {
  PitchNetConfig cfg;
  cfg.channel_scale = 0.25;
  PitchNet a(cfg, 13), b(cfg, 13);
  auto first = pitch::pretrain(a, 48, 1, 3e-4, 21);
  auto more = pitch::pretrain(b, 48, 6, 3e-4, 21);
  CHECK(more.final_loss < first.final_loss);
}

TEST_CASE("pitch net checkpoint round trip") {
  PitchNetConfig cfg;
  cfg.channel_scale = 0.25;
  PitchNet net(cfg, 14);
  net.save("pitch_test.bin");

  PitchNet loaded(cfg, 999);  // different init
  loaded.load("pitch_test.bin");
  Rng rng(5);
  Tensor wave = test::random_tensor({1200}, rng, -0.5, 0.5);
  ad::NoGradGuard ng;
  ad::Var pa = net.probabilities(ad::Var::constant(wave));
  ad::Var pb = loaded.probabilities(ad::Var::constant(wave));
  CHECK(pa.val().data == pb.val().data);
  std::remove("pitch_test.bin");
}
