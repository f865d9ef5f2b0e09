// sfs/dsp.h -- signal-processing primitives.
//
// The spectral operations (framing, STFT magnitude, mel, mcep, resampling)
// run on autodiff Vars so they can sit inside loss paths; Tensor/Waveform
// overloads wrap them for plain feature extraction. Frames are centered at
// t*hop via reflect padding of win/2, giving floor(len/hop)+1 frames.
#pragma once

#include <utility>
#include <vector>

#include "sfs/autodiff.h"
#include "sfs/tensor.h"
#include "sfs/wav.h"

namespace sfs::dsp {

using ad::Var;

struct StftConfig {
  int64_t fft_size = 2048;
  int64_t hop = 512;
  int64_t win_length = 2048;  // must equal fft_size
};

struct DspConfig {
  int sample_rate = 44100;
  StftConfig stft;
  int64_t n_mels = 80;
  double mel_fmin = 0.0;
  double mel_fmax = 22050.0;
  double mel_floor = 1e-5;
  int64_t n_mcep = 80;
  double alpha_warp = 0.55;
  double f0_min = 55.0;
  double f0_max = 1000.0;
};

struct AcousticFeatures {
  Tensor mcep;                 // [T, n_mcep]
  std::vector<double> log_f0;  // natural log Hz, 0 where unvoiced
  std::vector<char> vuv;
  int64_t frame_hop = 512;
  int64_t frame_length = 2048;

  int64_t frames() const { return mcep.rows(); }
};

struct NormStats {
  std::vector<double> mcep_mean, mcep_std;
  double lf0_mean = 0.0, lf0_std = 1.0;

  void save(const std::string& path) const;
  static NormStats load(const std::string& path);
};

int64_t num_frames(int64_t len, int64_t hop);

// [L] -> [T, win], reflect-padded so frame t is centered at sample t*hop.
Var frame_signal(const Var& x, int64_t win, int64_t hop);

// Windowed magnitude spectra, differentiable w.r.t. the signal. [T, fft/2+1]
Var stft_magnitude(const Var& x, const StftConfig& cfg);
Tensor stft_magnitude(const Waveform& wave, const StftConfig& cfg);

// log(mel filterbank * magnitude + floor). [T, n_mels]
Var mel_spectrogram(const Var& x, const DspConfig& cfg);
Tensor mel_spectrogram(const Waveform& wave, const DspConfig& cfg);

// Warped cepstrum: log magnitude resampled on the alpha-warped frequency
// axis, cosine-transformed, truncated. Coefficient 0 carries frame log gain.
Var extract_mcep(const Var& x, const DspConfig& cfg);
Tensor extract_mcep(const Waveform& wave, const DspConfig& cfg);

// Reference F0 via normalized-autocorrelation (YIN-style), with V/UV.
struct F0Track {
  std::vector<double> f0;  // Hz, 0 where unvoiced
  std::vector<char> vuv;
};
F0Track extract_f0_reference(const Waveform& wave, double f_min, double f_max,
                             int64_t frame_hop);

// Windowed-sinc rational-ratio resampling; linear in the input samples.
Var resample(const Var& x, int src_rate, int dst_rate);
Waveform resample(const Waveform& wave, int target_rate);

// Waveform -> frame-aligned features, trimmed to exactly len/hop frames.
AcousticFeatures extract_features(const Waveform& wave, const DspConfig& cfg);

NormStats fit_norm_stats(const std::vector<AcousticFeatures>& corpus);
void apply_norm(AcousticFeatures& f, const NormStats& s);
void invert_norm(AcousticFeatures& f, const NormStats& s);

std::vector<double> hann_window(int64_t n);

}  // namespace sfs::dsp
