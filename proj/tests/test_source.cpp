// tests/test_source.cpp
#include <doctest.h>

#include <cmath>

#include "gradcheck.h"
#include "sfs/fft.h"
#include "sfs/source.h"

using namespace sfs;
using ad::Var;
using source::SourceConfig;
using source::SourceModule;

namespace {

int64_t peak_bin(const Tensor& branches, int64_t branch, int64_t fft_size) {
  std::vector<double> x(static_cast<size_t>(fft_size), 0.0);
  const int64_t n = std::min<int64_t>(fft_size, branches.rows());
  for (int64_t t = 0; t < n; ++t)
    x[static_cast<size_t>(t)] = branches.at(t, branch) *
        (0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(t) / static_cast<double>(n)));
  auto spec = rfft(x.data(), fft_size);
  int64_t best = 0;
  double best_mag = -1.0;
  for (int64_t k = 1; k <= fft_size / 2; ++k) {
    const double m = spec[static_cast<size_t>(2 * k)] * spec[static_cast<size_t>(2 * k)] +
                     spec[static_cast<size_t>(2 * k + 1)] * spec[static_cast<size_t>(2 * k + 1)];
    if (m > best_mag) {
      best_mag = m;
      best = k;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("unvoiced excitation: zero-mean noise with std 1/3") {
  SourceConfig cfg;
  Rng rng(1);
  std::vector<double> f0(10000, 0.0);
  Tensor e = source::generate_excitation(f0, cfg, rng, true);
  for (int64_t b = 0; b < cfg.branches(); ++b) {
    double mean = 0.0, sq = 0.0;
    for (int64_t t = 0; t < e.rows(); ++t) {
      mean += e.at(t, b);
      sq += e.at(t, b) * e.at(t, b);
    }
    mean /= static_cast<double>(e.rows());
    const double stdv = std::sqrt(sq / static_cast<double>(e.rows()) - mean * mean);
    CHECK(std::fabs(mean) < 0.02);
    CHECK(std::fabs(stdv - 1.0 / 3.0) < 0.1 / 3.0);  // within 10 %
  }
}

TEST_CASE("harmonic placement: branch b peaks at (b+1)*f0") {
  SourceConfig cfg;
  Rng rng(2);
  const int64_t fft_size = 32768;
  const double bin_hz = 44100.0 / static_cast<double>(fft_size);
  for (double f : {110.0, 220.0, 440.0}) {
    std::vector<double> f0(static_cast<size_t>(fft_size), f);
    Tensor e = source::generate_excitation(f0, cfg, rng, true);
    for (int64_t b = 0; b < 3; ++b) {
      const int64_t peak = peak_bin(e, b, fft_size);
      const int64_t expect = std::llround(static_cast<double>(b + 1) * f / bin_hz);
      INFO("f0 ", f, " branch ", b);
      CHECK(std::llabs(peak - expect) <= 1);
    }
  }
}

TEST_CASE("phase accumulator freezes across unvoiced gaps") {
  SourceConfig cfg;
  cfg.sigma = 1e-9;  // keep the voiced noise term negligible
  Rng rng(3);
  std::vector<double> f0;
  for (int i = 0; i < 150; ++i) f0.push_back(440.0);
  for (int i = 0; i < 80; ++i) f0.push_back(0.0);
  for (int i = 0; i < 150; ++i) f0.push_back(330.0);

  Tensor e = source::generate_excitation(f0, cfg, rng, false);  // phase 0

  // cumulative-sum oracle for the fundamental branch
  double phase = 0.0;
  for (size_t t = 0; t < f0.size(); ++t) {
    phase += 2.0 * kPi * f0[t] / 44100.0;
    if (f0[t] > 0.0)
      CHECK(e.at(static_cast<int64_t>(t), 0) ==
            doctest::Approx(cfg.alpha * std::sin(phase)).epsilon(1e-4));
  }
}

TEST_CASE("determinism given seed; negative f0 rejected") {
  SourceConfig cfg;
  std::vector<double> f0(500, 220.0);
  Rng a(7), b(7);
  Tensor ea = source::generate_excitation(f0, cfg, a, true);
  Tensor eb = source::generate_excitation(f0, cfg, b, true);
  CHECK(ea.data == eb.data);

  Rng c(7);
  std::vector<double> bad = {100.0, -1.0};
  CHECK_THROWS_AS(source::generate_excitation(bad, cfg, c, true), NegativeF0);
}

TEST_CASE("upsample_f0: hold, boundary, interpolation") {
  CHECK(source::upsample_f0({440.0, 440.0}, 4) ==
        std::vector<double>{440, 440, 440, 440, 440, 440, 440, 440});
  CHECK(source::upsample_f0({440.0, 0.0}, 2) == std::vector<double>{440, 440, 0, 0});

  auto ramp = source::upsample_f0({400.0, 480.0}, 4);
  REQUIRE(ramp.size() == 8);
  for (size_t i = 0; i + 1 < 4; ++i) CHECK(ramp[i + 1] > ramp[i]);
  CHECK(ramp[0] == 400.0);
  CHECK(ramp[4] == 480.0);
}

TEST_CASE("merge: identity weights, zero weights, gradient") {
  nn::ParamStore ps(5);
  SourceConfig cfg;
  SourceModule mod(ps, "src", cfg);

  Rng rng(6);
  Tensor branches = test::random_tensor({32, cfg.branches()}, rng, -0.5, 0.5);

  // weights [1, 0, ...], bias 0 -> merged == tanh(branch 0)
  mod.merge_layer().w.val().fill(0.0);
  mod.merge_layer().w.val().data[0] = 1.0;
  mod.merge_layer().b.val().fill(0.0);
  Var merged = mod.merge(Var::constant(branches));
  for (int64_t t = 0; t < 32; ++t)
    CHECK(merged.val().at(t, 0) == doctest::Approx(std::tanh(branches.at(t, 0))).epsilon(1e-12));

  // zero weights, zero bias -> identically 0
  mod.merge_layer().w.val().fill(0.0);
  Var zero = mod.merge(Var::constant(branches));
  for (double v : zero.val().data) CHECK(v == 0.0);

  // gradient of sum(merged) w.r.t. the weights matches finite differences
  Tensor w0 = test::random_tensor({1, cfg.branches()}, rng, -0.4, 0.4);
  auto f = [&](const Var& w) {
    Var pre = ad::add_rowvec(ad::matmul(Var::constant(branches), w, false, true),
                             Var::constant(Tensor({1})));
    return ad::sum_all(ad::tanh_act(pre));
  };
  auto res = test::check_gradient(f, w0, test::all_coords(w0), 1e-4);
  CHECK(res.max_rel_err < 1e-4);

  // gradient w.r.t. the branches themselves
  auto fb = [&](const Var& br) { return ad::sum_all(mod.merge(br)); };
  auto res2 = test::check_gradient(fb, branches, test::sample_coords(branches, 16, rng), 1e-4);
  CHECK(res2.max_rel_err < 1e-4);

  Tensor wrong = test::random_tensor({8, 3}, rng);
  CHECK_THROWS_AS(mod.merge(Var::constant(wrong)), ShapeMismatch);
}

TEST_CASE("rendered excitation: deterministic part stays within alpha") {
  nn::ParamStore ps(44);
  SourceConfig cfg;
  SourceModule mod(ps, "src", cfg);
  Rng rng(45);
  std::vector<double> f0(2000, 440.0);
  source::ExcitationSignal sig = mod.render(f0, 44100.0, rng, true);
  CHECK(sig.rate == 44100.0);
  CHECK(sig.branches.rows() == 2000);
  CHECK(sig.branches.cols() == cfg.branches());
  CHECK(sig.merged.rows() == 2000);
  // |deterministic part| <= alpha: noise std sigma bounds the excess
  for (double v : sig.branches.data)
    CHECK(std::fabs(v) <= cfg.alpha + 6.0 * cfg.sigma);
  CHECK(sig.branches.all_finite());
}

TEST_CASE("frame-rate excitation: shapes and unvoiced behavior") {
  nn::ParamStore ps(8);
  SourceConfig cfg;
  SourceModule mod(ps, "src", cfg);
  Rng rng(9);

  std::vector<double> f0(24, 0.0);
  Var frame = mod.frame_excitation(f0, 64, rng, true);
  CHECK(frame.val().rows() == 24);  // output frame count == input frame count
  double mean = 0.0;
  for (double v : frame.val().data) mean += v;
  mean /= static_cast<double>(frame.val().numel());
  CHECK(std::fabs(mean) < 0.05);  // near-zero-mean noise

  // pooling arithmetic: doubling the hop halves the frame count for a fixed
  // sample-level excitation
  std::vector<double> sample_f0(256, 200.0);
  Var merged = mod.sample_excitation(sample_f0, rng, true);
  CHECK(ad::avg_pool_rows(merged, 4).val().rows() == 64);
  CHECK(ad::avg_pool_rows(merged, 8).val().rows() == 32);
}
