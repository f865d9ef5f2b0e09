// tests/test_dsp.cpp
#include <doctest.h>

#include <cmath>

#include "gradcheck.h"
#include "sfs/dsp.h"
#include "sfs/fft.h"

using namespace sfs;
using ad::Var;
using test::check_gradient;
using test::sample_coords;

namespace {

Waveform make_sine(double freq, double seconds, int sr, double amp = 0.5) {
  Waveform w;
  w.sample_rate = sr;
  const int64_t n = static_cast<int64_t>(seconds * sr);
  w.samples.resize(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i)
    w.samples[static_cast<size_t>(i)] =
        amp * std::sin(2.0 * kPi * freq * static_cast<double>(i) / sr);
  return w;
}

Waveform make_noise(double seconds, int sr, double amp, uint64_t seed) {
  Rng rng(seed);
  Waveform w;
  w.sample_rate = sr;
  const int64_t n = static_cast<int64_t>(seconds * sr);
  w.samples.resize(static_cast<size_t>(n));
  for (double& s : w.samples) s = rng.uniform(-amp, amp);
  return w;
}

int64_t spectral_peak_bin(const std::vector<double>& x, int64_t fft_size) {
  std::vector<double> padded(static_cast<size_t>(fft_size), 0.0);
  auto win = dsp::hann_window(std::min<int64_t>(fft_size, static_cast<int64_t>(x.size())));
  for (size_t i = 0; i < win.size(); ++i) padded[i] = x[i] * win[i];
  auto spec = rfft(padded.data(), fft_size);
  int64_t best = 0;
  double best_mag = -1.0;
  for (int64_t k = 0; k <= fft_size / 2; ++k) {
    const double m = spec[static_cast<size_t>(2 * k)] * spec[static_cast<size_t>(2 * k)] +
                     spec[static_cast<size_t>(2 * k + 1)] * spec[static_cast<size_t>(2 * k + 1)];
    if (m > best_mag) {
      best_mag = m;
      best = k;
    }
  }
  return best;
}

const dsp::DspConfig kCfg;  // 44.1 kHz, fft 2048, hop 512

}  // namespace

TEST_CASE("stft: 1 kHz sine peaks at the analytic bin") {
  Waveform w = make_sine(1000.0, 0.2, 44100);
  Tensor mag = dsp::stft_magnitude(w, kCfg.stft);
  CHECK(mag.cols() == 1025);
  CHECK(mag.rows() == static_cast<int64_t>(w.samples.size()) / 512 + 1);

  // expected bin = round(1000 / (44100/2048)) = 46
  const int64_t t = mag.rows() / 2;
  int64_t peak = 0;
  double best = -1.0;
  for (int64_t k = 0; k < mag.cols(); ++k)
    if (mag.at(t, k) > best) {
      best = mag.at(t, k);
      peak = k;
    }
  CHECK(peak == 46);
}

TEST_CASE("stft: zero signal gives zero magnitudes") {
  Waveform w;
  w.samples.assign(4096, 0.0);
  Tensor mag = dsp::stft_magnitude(w, kCfg.stft);
  for (double v : mag.data) CHECK(v <= 1e-12);
}

TEST_CASE("stft: rejects too-short signals") {
  Waveform w;
  w.samples.assign(1024, 0.1);
  CHECK_THROWS_AS(dsp::stft_magnitude(w, kCfg.stft), TooShortSignal);
}

TEST_CASE("stft gradient matches finite differences") {
  Rng rng(21);
  Tensor x = test::random_tensor({2560}, rng, -0.5, 0.5);
  auto f = [&](const Var& v) {
    return ad::sum_all(dsp::stft_magnitude(v, kCfg.stft));
  };
  auto res = check_gradient(f, x, sample_coords(x, 24, rng), 1e-4);
  CHECK(res.max_rel_err < 1e-4);
}

TEST_CASE("mel: white noise is flat within 20 dB across bands") {
  Waveform w = make_noise(1.0, 44100, 0.5, 5);
  Tensor mel = dsp::mel_spectrogram(w, kCfg);
  std::vector<double> band_mean(80, 0.0);
  for (int64_t t = 0; t < mel.rows(); ++t)
    for (int64_t m = 0; m < 80; ++m) band_mean[static_cast<size_t>(m)] += mel.at(t, m);
  double lo = 1e30, hi = -1e30;
  for (double& v : band_mean) {
    v /= static_cast<double>(mel.rows());
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  // natural-log difference -> dB via 20/ln(10)
  CHECK((hi - lo) * 8.6859 < 20.0);
}

TEST_CASE("mel: silence hits the log floor exactly; extraction deterministic") {
  Waveform w;
  w.samples.assign(4096, 0.0);
  Tensor mel = dsp::mel_spectrogram(w, kCfg);
  for (double v : mel.data)
    CHECK(v == doctest::Approx(std::log(kCfg.mel_floor)).epsilon(1e-9));

  Waveform n = make_noise(0.1, 44100, 0.3, 6);
  Tensor a = dsp::mel_spectrogram(n, kCfg);
  Tensor b = dsp::mel_spectrogram(n, kCfg);
  CHECK(a.data == b.data);
}

TEST_CASE("mel gradient matches finite differences") {
  Rng rng(26);
  Tensor x = test::random_tensor({2560}, rng, -0.5, 0.5);
  auto f = [&](const Var& v) { return ad::sum_all(dsp::mel_spectrogram(v, kCfg)); };
  auto res = check_gradient(f, x, sample_coords(x, 16, rng), 1e-4);
  CHECK(res.max_rel_err < 1e-3);
}

TEST_CASE("mcep: gain scaling shifts only coefficient 0, by log(g)") {
  Waveform w = make_noise(0.15, 44100, 0.3, 7);
  Waveform scaled = w;
  const double g = 2.5;
  for (double& s : scaled.samples) s *= g;

  Tensor base = dsp::extract_mcep(w, kCfg);
  Tensor up = dsp::extract_mcep(scaled, kCfg);
  CHECK(base.cols() == 80);
  for (int64_t t = 0; t < base.rows(); ++t) {
    CHECK(up.at(t, 0) - base.at(t, 0) == doctest::Approx(std::log(g)).epsilon(1e-9));
    for (int64_t m = 1; m < 80; ++m)
      CHECK(std::fabs(up.at(t, m) - base.at(t, m)) < 1e-6);
  }
}

TEST_CASE("mcep: white-noise frames average near zero above c0") {
  Waveform w = make_noise(1.2, 44100, 0.4, 8);
  Tensor mc = dsp::extract_mcep(w, kCfg);
  std::vector<double> mean(80, 0.0);
  for (int64_t t = 0; t < mc.rows(); ++t)
    for (int64_t m = 0; m < 80; ++m) mean[static_cast<size_t>(m)] += mc.at(t, m);
  for (double& v : mean) v /= static_cast<double>(mc.rows());
  for (int64_t m = 1; m < 80; ++m)
    CHECK(std::fabs(mean[static_cast<size_t>(m)]) < 0.05 * std::fabs(mean[0]));
}

TEST_CASE("mcep gradient matches finite differences (3-frame signal)") {
  Rng rng(22);
  Tensor x = test::random_tensor({2048 + 512}, rng, -0.5, 0.5);  // 3 usable frames
  auto f = [&](const Var& v) { return ad::sum_all(dsp::extract_mcep(v, kCfg)); };
  auto res = check_gradient(f, x, sample_coords(x, 20, rng), 1e-4);
  CHECK(res.max_rel_err < 1e-3);
}

TEST_CASE("f0 reference: pure tones recovered within 2 Hz") {
  for (double freq : {110.0, 220.0, 440.0, 880.0}) {
    Waveform w = make_sine(freq, 0.6, 44100);
    auto track = dsp::extract_f0_reference(w, 55.0, 1000.0, 512);
    const int64_t t_frames = static_cast<int64_t>(track.f0.size());
    int64_t good = 0, interior = 0;
    for (int64_t t = 3; t < t_frames - 3; ++t) {
      ++interior;
      if (track.vuv[static_cast<size_t>(t)] &&
          std::fabs(track.f0[static_cast<size_t>(t)] - freq) <= 2.0)
        ++good;
    }
    INFO("freq ", freq);
    CHECK(static_cast<double>(good) >= 0.9 * static_cast<double>(interior));
  }
}

TEST_CASE("f0 reference: noise is mostly unvoiced, silence fully unvoiced") {
  Waveform noise = make_noise(0.5, 44100, 0.01, 9);
  auto track = dsp::extract_f0_reference(noise, 55.0, 1000.0, 512);
  int64_t voiced = 0;
  for (char v : track.vuv) voiced += v;
  CHECK(static_cast<double>(voiced) < 0.2 * static_cast<double>(track.vuv.size()));

  Waveform silence;
  silence.samples.assign(44100 / 2, 0.0);
  auto st = dsp::extract_f0_reference(silence, 55.0, 1000.0, 512);
  for (size_t t = 0; t < st.f0.size(); ++t) {
    CHECK(st.f0[t] == 0.0);
    CHECK(st.vuv[t] == 0);
  }
  // invariant: f0 == 0 exactly where unvoiced
  for (size_t t = 0; t < track.f0.size(); ++t)
    CHECK((track.f0[t] != 0.0) == (track.vuv[t] != 0));
}

TEST_CASE("resample: length ratio, spectral peak, identity, linearity") {
  // 441 samples at 44100 -> 160 samples at 16000
  Waveform w441;
  w441.sample_rate = 44100;
  w441.samples.assign(441, 0.25);
  CHECK(dsp::resample(w441, 16000).samples.size() == 160);

  // 1 kHz sine keeps its peak within one 1024-point FFT bin
  Waveform sine = make_sine(1000.0, 0.3, 44100);
  Waveform rs = dsp::resample(sine, 16000);
  CHECK(rs.sample_rate == 16000);
  const int64_t peak = spectral_peak_bin(rs.samples, 1024);
  const int64_t expect = std::llround(1000.0 / (16000.0 / 1024.0));
  CHECK(std::llabs(peak - expect) <= 1);

  // same-rate resampling is the identity
  Waveform same = dsp::resample(sine, 44100);
  REQUIRE(same.samples.size() == sine.samples.size());
  for (size_t i = 0; i < sine.samples.size(); ++i)
    CHECK(std::fabs(same.samples[i] - sine.samples[i]) < 1e-6);

  // linearity: resample(a*x + b*y) == a*resample(x) + b*resample(y)
  Waveform nx = make_noise(0.1, 44100, 0.5, 10);
  Waveform ny = make_noise(0.1, 44100, 0.5, 11);
  Waveform mix = nx;
  for (size_t i = 0; i < mix.samples.size(); ++i)
    mix.samples[i] = 0.7 * nx.samples[i] + 1.3 * ny.samples[i];
  Waveform rx = dsp::resample(nx, 16000), ry = dsp::resample(ny, 16000),
           rmix = dsp::resample(mix, 16000);
  for (size_t i = 0; i < rmix.samples.size(); ++i)
    CHECK(std::fabs(rmix.samples[i] - (0.7 * rx.samples[i] + 1.3 * ry.samples[i])) < 1e-6);

  CHECK_THROWS_AS(dsp::resample(sine, 0), UnsupportedRatio);
}

TEST_CASE("resample gradient matches finite differences") {
  Rng rng(23);
  Tensor x = test::random_tensor({1024}, rng, -0.5, 0.5);
  auto f = [&](const Var& v) {
    return ad::sum_all(ad::square(dsp::resample(v, 44100, 16000)));
  };
  auto res = check_gradient(f, x, sample_coords(x, 24, rng), 1e-4);
  CHECK(res.max_rel_err < 1e-4);
}

TEST_CASE("norm stats: fit, apply, invert") {
  Rng rng(24);
  dsp::DspConfig cfg = kCfg;
  std::vector<dsp::AcousticFeatures> corpus;
  for (int u = 0; u < 3; ++u) {
    dsp::AcousticFeatures f;
    f.mcep = test::random_tensor({40, 80}, rng, -2.0, 3.0);
    f.log_f0.assign(40, 0.0);
    f.vuv.assign(40, 0);
    for (int t = 0; t < 40; t += 2) {
      f.log_f0[static_cast<size_t>(t)] = rng.uniform(4.0, 6.5);
      f.vuv[static_cast<size_t>(t)] = 1;
    }
    corpus.push_back(f);
  }
  dsp::NormStats stats = dsp::fit_norm_stats(corpus);

  // normalized corpus: per-dim mean ~0, std ~1
  std::vector<dsp::AcousticFeatures> normed = corpus;
  for (auto& f : normed) dsp::apply_norm(f, stats);
  for (int64_t d = 0; d < 80; ++d) {
    double mean = 0.0, sq = 0.0;
    int64_t n = 0;
    for (const auto& f : normed)
      for (int64_t t = 0; t < f.frames(); ++t) {
        mean += f.mcep.at(t, d);
        sq += f.mcep.at(t, d) * f.mcep.at(t, d);
        ++n;
      }
    mean /= static_cast<double>(n);
    const double stdv = std::sqrt(sq / static_cast<double>(n) - mean * mean);
    CHECK(std::fabs(mean) < 1e-6);
    CHECK(std::fabs(stdv - 1.0) < 1e-6);
  }

  // apply then invert is the identity
  for (auto& f : normed) dsp::invert_norm(f, stats);
  for (size_t u = 0; u < corpus.size(); ++u) {
    for (size_t i = 0; i < corpus[u].mcep.data.size(); ++i)
      CHECK(std::fabs(normed[u].mcep.data[i] - corpus[u].mcep.data[i]) < 1e-6);
    for (size_t t = 0; t < corpus[u].log_f0.size(); ++t)
      CHECK(std::fabs(normed[u].log_f0[t] - corpus[u].log_f0[t]) < 1e-6);
  }

  // stats file round trip
  stats.save("norm_test.bin");
  dsp::NormStats loaded = dsp::NormStats::load("norm_test.bin");
  CHECK(loaded.mcep_mean == stats.mcep_mean);
  CHECK(loaded.mcep_std == stats.mcep_std);
  CHECK(loaded.lf0_mean == stats.lf0_mean);
  std::remove("norm_test.bin");

  // constant dimension -> DegenerateDimension
  dsp::AcousticFeatures flat;
  flat.mcep = Tensor({10, 80});
  flat.log_f0.assign(10, 0.0);
  flat.vuv.assign(10, 0);
  CHECK_THROWS_AS(dsp::fit_norm_stats({flat}), DegenerateDimension);
  (void)cfg;
}

TEST_CASE("wav io: round trip and format rejection") {
  Waveform w = make_sine(440.0, 0.1, 44100, 0.6);
  write_wav("wav_test.wav", w);
  Waveform r = read_wav("wav_test.wav", 44100);
  REQUIRE(r.samples.size() == w.samples.size());
  CHECK(r.sample_rate == 44100);
  for (size_t i = 0; i < w.samples.size(); ++i)
    CHECK(std::fabs(r.samples[i] - w.samples[i]) < 1.0 / 32000.0);

  // wrong sample rate is rejected when pinned
  Waveform w16 = make_sine(440.0, 0.1, 16000, 0.6);
  write_wav("wav_test16.wav", w16);
  CHECK_THROWS_AS(read_wav("wav_test16.wav", 44100), WrongSampleRate);
  CHECK(read_wav("wav_test16.wav").sample_rate == 16000);

  CHECK_THROWS_AS(read_wav("definitely_missing.wav"), IOError);
  std::remove("wav_test.wav");
  std::remove("wav_test16.wav");
}

TEST_CASE("extract_features aligns frames to len/hop") {
  Waveform w = make_sine(330.0, 0.5, 44100, 0.4);
  dsp::AcousticFeatures f = dsp::extract_features(w, kCfg);
  CHECK(f.frames() == w.size() / 512);
  CHECK(f.mcep.cols() == 80);
  CHECK(f.log_f0.size() == static_cast<size_t>(f.frames()));
  // vuv[t] == (log_f0[t] != 0)
  for (size_t t = 0; t < f.log_f0.size(); ++t)
    CHECK((f.log_f0[t] != 0.0) == (f.vuv[t] != 0));
  CHECK(f.mcep.all_finite());
}
