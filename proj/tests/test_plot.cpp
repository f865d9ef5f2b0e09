// tests/test_plot.cpp
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "sfs/plot.h"

using namespace sfs;

namespace {

std::vector<double> read_sidecar_f0(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> f0;
  while (std::getline(in, line)) {
    const size_t comma = line.rfind(',');
    REQUIRE(comma != std::string::npos);
    f0.push_back(std::stod(line.substr(comma + 1)));
  }
  return f0;
}

int64_t file_size(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  return in.good() ? static_cast<int64_t>(in.tellg()) : -1;
}

}  // namespace

TEST_CASE("plot: chirp produces a monotone contour in the sidecar") {
  dsp::DspConfig cfg;
  Waveform chirp;
  chirp.sample_rate = 44100;
  const double seconds = 1.0;
  const int64_t n = static_cast<int64_t>(seconds * 44100);
  double phase = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double f = 150.0 + 400.0 * static_cast<double>(i) / static_cast<double>(n);
    phase += 2.0 * kPi * f / 44100.0;
    chirp.samples.push_back(0.5 * std::sin(phase));
  }
  auto track = dsp::extract_f0_reference(chirp, cfg.f0_min, cfg.f0_max, cfg.stft.hop);
  plot::spectrogram_pitch(chirp, track.f0, cfg, "chirp_test.png");

  CHECK(file_size("chirp_test.png") > 1000);
  auto f0 = read_sidecar_f0("chirp_test.png.csv");
  REQUIRE(f0.size() == track.f0.size());

  // interior contour rises with the chirp
  int rising = 0, total = 0;
  for (size_t t = 6; t + 6 < f0.size(); ++t)
    if (f0[t] > 0 && f0[t + 1] > 0) {
      ++total;
      if (f0[t + 1] >= f0[t] - 1.0) ++rising;
    }
  REQUIRE(total > 20);
  CHECK(static_cast<double>(rising) > 0.9 * static_cast<double>(total));

  // determinism: same inputs, byte-identical image
  plot::spectrogram_pitch(chirp, track.f0, cfg, "chirp_test2.png");
  std::ifstream a("chirp_test.png", std::ios::binary), b("chirp_test2.png", std::ios::binary);
  std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
  std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  CHECK(sa == sb);
  std::remove("chirp_test.png");
  std::remove("chirp_test.png.csv");
  std::remove("chirp_test2.png");
  std::remove("chirp_test2.png.csv");
}

TEST_CASE("plot: silence yields an empty contour") {
  dsp::DspConfig cfg;
  Waveform silence;
  silence.sample_rate = 44100;
  silence.samples.assign(44100 / 2, 0.0);
  auto track = dsp::extract_f0_reference(silence, cfg.f0_min, cfg.f0_max, cfg.stft.hop);
  plot::spectrogram_pitch(silence, track.f0, cfg, "silence_test.png");
  CHECK(file_size("silence_test.png") > 0);
  for (double v : read_sidecar_f0("silence_test.png.csv")) CHECK(v == 0.0);
  std::remove("silence_test.png");
  std::remove("silence_test.png.csv");
}
