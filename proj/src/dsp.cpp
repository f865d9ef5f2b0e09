// src/dsp.cpp
#include "sfs/dsp.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "sfs/fft.h"

namespace sfs::dsp {

namespace {

constexpr double kMagEps = 1e-120;  // keeps sqrt/log finite on silent frames

int64_t reflect_index(int64_t i, int64_t len) {
  // reflect without repeating the edge sample, e.g. -1 -> 1, len -> len-2
  while (i < 0 || i >= len) {
    if (i < 0) i = -i;
    if (i >= len) i = 2 * len - 2 - i;
  }
  return i;
}

}  // namespace

std::vector<double> hann_window(int64_t n) {
  std::vector<double> w(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i)
    w[static_cast<size_t>(i)] =
        0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n));
  return w;
}

int64_t num_frames(int64_t len, int64_t hop) { return len / hop + 1; }

Var frame_signal(const Var& x, int64_t win, int64_t hop) {
  const int64_t len = x.val().numel();
  if (len < win) throw TooShortSignal("signal length " + std::to_string(len) +
                                      " < window " + std::to_string(win));
  const int64_t t_frames = num_frames(len, hop);
  std::vector<int64_t> idx;
  idx.reserve(static_cast<size_t>(t_frames * win));
  for (int64_t t = 0; t < t_frames; ++t)
    for (int64_t j = 0; j < win; ++j)
      idx.push_back(reflect_index(t * hop - win / 2 + j, len));
  Var flat = ad::reshape(x, {len, 1});
  return ad::reshape(ad::gather_rows(flat, std::move(idx)), {t_frames, win});
}

namespace {

// Magnitude of the one-sided FFT of each row. Custom node: the transform is
// linear, so the backward pass is the adjoint transform of the cotangents.
Var rfft_magnitude(const Var& frames) {
  const int64_t t_frames = frames.val().rows();
  const int64_t n = frames.val().cols();
  require(is_power_of_two(n), "fft size must be a power of two");
  const int64_t bins = n / 2 + 1;

  auto spec = std::make_shared<Tensor>(Tensor({t_frames, 2 * bins}));
  Tensor mag({t_frames, bins});
  for (int64_t t = 0; t < t_frames; ++t) {
    auto row = rfft(frames.val().ptr() + t * n, n);
    for (int64_t k = 0; k < bins; ++k) {
      const double re = row[static_cast<size_t>(2 * k)];
      const double im = row[static_cast<size_t>(2 * k + 1)];
      spec->data[static_cast<size_t>(t * 2 * bins + 2 * k)] = re;
      spec->data[static_cast<size_t>(t * 2 * bins + 2 * k + 1)] = im;
      mag.data[static_cast<size_t>(t * bins + k)] = std::sqrt(re * re + im * im + kMagEps);
    }
  }
  return ad::make_op(std::move(mag), {frames}, [spec, t_frames, n, bins](ad::Node& node) {
    ad::Node* p = node.parents[0].get();
    if (!p->requires_grad) return;
    Tensor& gx = p->ensure_grad();
    std::vector<double> buf(static_cast<size_t>(2 * n));
    for (int64_t t = 0; t < t_frames; ++t) {
      std::fill(buf.begin(), buf.end(), 0.0);
      for (int64_t k = 0; k < bins; ++k) {
        const double re = spec->data[static_cast<size_t>(t * 2 * bins + 2 * k)];
        const double im = spec->data[static_cast<size_t>(t * 2 * bins + 2 * k + 1)];
        const double m = node.value.data[static_cast<size_t>(t * bins + k)];
        const double g = node.grad.data[static_cast<size_t>(t * bins + k)];
        buf[static_cast<size_t>(2 * k)] = g * re / m;
        buf[static_cast<size_t>(2 * k + 1)] = g * im / m;
      }
      fft_complex(buf, +1);  // adjoint of the one-sided forward transform
      for (int64_t j = 0; j < n; ++j)
        gx.data[static_cast<size_t>(t * n + j)] += buf[static_cast<size_t>(2 * j)];
    }
  });
}

}  // namespace

Var stft_magnitude(const Var& x, const StftConfig& cfg) {
  require(cfg.win_length == cfg.fft_size, "win_length must equal fft_size");
  Var frames = frame_signal(x, cfg.win_length, cfg.hop);
  Var window = Var::constant(Tensor::from_vector(hann_window(cfg.win_length)));
  return rfft_magnitude(ad::mul_rowvec(frames, window));
}

Tensor stft_magnitude(const Waveform& wave, const StftConfig& cfg) {
  ad::NoGradGuard ng;
  return stft_magnitude(Var::constant(Tensor::from_vector(wave.samples)), cfg).val();
}

namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Triangular filters on the HTK mel scale, area-normalized so a flat input
// spectrum produces a flat band response.
Tensor mel_filterbank(const DspConfig& cfg) {
  const int64_t bins = cfg.stft.fft_size / 2 + 1;
  const double nyquist = cfg.sample_rate / 2.0;
  Tensor mat({cfg.n_mels, bins});
  const double mel_lo = hz_to_mel(cfg.mel_fmin);
  const double mel_hi = hz_to_mel(std::min(cfg.mel_fmax, nyquist));
  std::vector<double> edges(static_cast<size_t>(cfg.n_mels + 2));
  for (int64_t m = 0; m < cfg.n_mels + 2; ++m)
    edges[static_cast<size_t>(m)] = mel_to_hz(
        mel_lo + (mel_hi - mel_lo) * static_cast<double>(m) / static_cast<double>(cfg.n_mels + 1));
  for (int64_t m = 0; m < cfg.n_mels; ++m) {
    const double lo = edges[static_cast<size_t>(m)];
    const double mid = edges[static_cast<size_t>(m + 1)];
    const double hi = edges[static_cast<size_t>(m + 2)];
    const double norm = 2.0 / (hi - lo);
    for (int64_t k = 0; k < bins; ++k) {
      const double f = nyquist * static_cast<double>(k) / static_cast<double>(bins - 1);
      double w = 0.0;
      if (f > lo && f < mid)
        w = (f - lo) / (mid - lo);
      else if (f >= mid && f < hi)
        w = (hi - f) / (hi - mid);
      mat.data[static_cast<size_t>(m * bins + k)] = w * norm;
    }
  }
  return mat;
}

}  // namespace

Var mel_spectrogram(const Var& x, const DspConfig& cfg) {
  Var mag = stft_magnitude(x, cfg.stft);
  Var mel = ad::matmul(mag, Var::constant(mel_filterbank(cfg)), false, true);
  return ad::log_(ad::sadd(mel, cfg.mel_floor));
}

Tensor mel_spectrogram(const Waveform& wave, const DspConfig& cfg) {
  ad::NoGradGuard ng;
  return mel_spectrogram(Var::constant(Tensor::from_vector(wave.samples)), cfg).val();
}

namespace {

// First-order all-pass frequency warp omega + 2*atan(a*sin/(1-a*cos)).
double warp_frequency(double omega, double alpha) {
  return omega + 2.0 * std::atan2(alpha * std::sin(omega), 1.0 - alpha * std::cos(omega));
}

// Linear interpolation of each row at fractional column positions.
Var interp_cols(const Var& x, std::vector<double> pos) {
  const int64_t t_frames = x.val().rows();
  const int64_t cols = x.val().cols();
  const int64_t j_out = static_cast<int64_t>(pos.size());
  Tensor out({t_frames, j_out});
  std::vector<int64_t> base(pos.size());
  std::vector<double> frac(pos.size());
  for (size_t j = 0; j < pos.size(); ++j) {
    double p = std::clamp(pos[j], 0.0, static_cast<double>(cols - 1));
    int64_t b = std::min<int64_t>(static_cast<int64_t>(p), cols - 2);
    base[j] = b;
    frac[j] = p - static_cast<double>(b);
  }
  for (int64_t t = 0; t < t_frames; ++t)
    for (int64_t j = 0; j < j_out; ++j) {
      const double* row = x.val().ptr() + t * cols;
      out.data[static_cast<size_t>(t * j_out + j)] =
          (1.0 - frac[static_cast<size_t>(j)]) * row[base[static_cast<size_t>(j)]] +
          frac[static_cast<size_t>(j)] * row[base[static_cast<size_t>(j)] + 1];
    }
  return ad::make_op(std::move(out), {x},
                     [base = std::move(base), frac = std::move(frac), t_frames,
                      cols, j_out](ad::Node& node) {
    ad::Node* p = node.parents[0].get();
    if (!p->requires_grad) return;
    Tensor& gx = p->ensure_grad();
    for (int64_t t = 0; t < t_frames; ++t)
      for (int64_t j = 0; j < j_out; ++j) {
        const double g = node.grad.data[static_cast<size_t>(t * j_out + j)];
        gx.data[static_cast<size_t>(t * cols + base[static_cast<size_t>(j)])] +=
            g * (1.0 - frac[static_cast<size_t>(j)]);
        gx.data[static_cast<size_t>(t * cols + base[static_cast<size_t>(j)] + 1)] +=
            g * frac[static_cast<size_t>(j)];
      }
  });
}

}  // namespace

Var extract_mcep(const Var& x, const DspConfig& cfg) {
  const int64_t bins = cfg.stft.fft_size / 2 + 1;
  const int64_t j_samples = bins;
  Var logmag = ad::log_(stft_magnitude(x, cfg.stft));

  // sample the log spectrum at warped-uniform frequencies
  std::vector<double> pos(static_cast<size_t>(j_samples));
  for (int64_t j = 0; j < j_samples; ++j) {
    const double warped = kPi * (static_cast<double>(j) + 0.5) / static_cast<double>(j_samples);
    const double omega = warp_frequency(warped, -cfg.alpha_warp);
    pos[static_cast<size_t>(j)] = omega / kPi * static_cast<double>(bins - 1);
  }
  Var warped = interp_cols(logmag, std::move(pos));

  // DCT-II analysis; c0 is the mean, so gain scaling shifts only c0
  Tensor dct({j_samples, cfg.n_mcep});
  for (int64_t j = 0; j < j_samples; ++j)
    for (int64_t m = 0; m < cfg.n_mcep; ++m) {
      const double scale = (m == 0) ? 1.0 / static_cast<double>(j_samples)
                                    : 2.0 / static_cast<double>(j_samples);
      dct.data[static_cast<size_t>(j * cfg.n_mcep + m)] =
          scale * std::cos(kPi * static_cast<double>(m) *
                           (2.0 * static_cast<double>(j) + 1.0) /
                           (2.0 * static_cast<double>(j_samples)));
    }
  return ad::matmul(warped, Var::constant(std::move(dct)));
}

Tensor extract_mcep(const Waveform& wave, const DspConfig& cfg) {
  ad::NoGradGuard ng;
  return extract_mcep(Var::constant(Tensor::from_vector(wave.samples)), cfg).val();
}

// ----------------------------------------------------------------- YIN F0

F0Track extract_f0_reference(const Waveform& wave, double f_min, double f_max,
                             int64_t frame_hop) {
  require(f_min < f_max && f_min >= 30.0 && f_max <= 1600.0, "f0 search range");
  const int64_t len = wave.size();
  const double sr = static_cast<double>(wave.sample_rate);
  const int64_t win = 2048;
  constexpr double kThreshold = 0.15;
  constexpr double kSilenceRms = 1e-4;

  F0Track track;
  if (len < win) return track;  // too short: empty (caller treats as unvoiced)

  const int64_t tau_min = std::max<int64_t>(2, static_cast<int64_t>(sr / f_max));
  const int64_t tau_max =
      std::min<int64_t>(win / 2, static_cast<int64_t>(sr / f_min) + 1);
  const int64_t t_frames = num_frames(len, frame_hop);
  track.f0.assign(static_cast<size_t>(t_frames), 0.0);
  track.vuv.assign(static_cast<size_t>(t_frames), 0);

  std::vector<double> frame(static_cast<size_t>(win));
  std::vector<double> diff(static_cast<size_t>(tau_max + 1));
  std::vector<double> cmndf(static_cast<size_t>(tau_max + 1));

  for (int64_t t = 0; t < t_frames; ++t) {
    double energy = 0.0;
    for (int64_t j = 0; j < win; ++j) {
      frame[static_cast<size_t>(j)] =
          wave.samples[static_cast<size_t>(reflect_index(t * frame_hop - win / 2 + j, len))];
      energy += frame[static_cast<size_t>(j)] * frame[static_cast<size_t>(j)];
    }
    if (std::sqrt(energy / static_cast<double>(win)) < kSilenceRms) continue;

    for (int64_t tau = 1; tau <= tau_max; ++tau) {
      double s = 0.0;
      for (int64_t j = 0; j < win - tau; ++j) {
        const double d = frame[static_cast<size_t>(j)] - frame[static_cast<size_t>(j + tau)];
        s += d * d;
      }
      diff[static_cast<size_t>(tau)] = s;
    }
    cmndf[0] = 1.0;
    double running = 0.0;
    for (int64_t tau = 1; tau <= tau_max; ++tau) {
      running += diff[static_cast<size_t>(tau)];
      cmndf[static_cast<size_t>(tau)] =
          running > 0.0 ? diff[static_cast<size_t>(tau)] * static_cast<double>(tau) / running : 1.0;
    }

    int64_t tau_est = 0;
    for (int64_t tau = tau_min; tau <= tau_max; ++tau) {
      if (cmndf[static_cast<size_t>(tau)] < kThreshold) {
        tau_est = tau;
        while (tau_est + 1 <= tau_max &&
               cmndf[static_cast<size_t>(tau_est + 1)] < cmndf[static_cast<size_t>(tau_est)])
          ++tau_est;
        break;
      }
    }
    if (tau_est == 0) continue;  // unvoiced

    const int64_t t0 = std::max<int64_t>(tau_est - 1, 1);
    const int64_t t2 = std::min<int64_t>(tau_est + 1, tau_max);
    const double s0 = cmndf[static_cast<size_t>(t0)], s1 = cmndf[static_cast<size_t>(tau_est)],
                 s2 = cmndf[static_cast<size_t>(t2)];
    const double denom = s0 - 2.0 * s1 + s2;
    const double shift = std::fabs(denom) > 1e-12 ? 0.5 * (s0 - s2) / denom : 0.0;
    const double tau_refined = static_cast<double>(tau_est) + std::clamp(shift, -0.5, 0.5);
    const double f0 = sr / tau_refined;
    if (f0 >= f_min && f0 <= f_max) {
      track.f0[static_cast<size_t>(t)] = f0;
      track.vuv[static_cast<size_t>(t)] = 1;
    }
  }
  return track;
}

// --------------------------------------------------------------- resampling

namespace {

double sinc(double x) {
  if (std::fabs(x) < 1e-12) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

}  // namespace

Var resample(const Var& x, int src_rate, int dst_rate) {
  if (src_rate <= 0 || dst_rate <= 0)
    throw UnsupportedRatio("rates must be positive, got " + std::to_string(src_rate) +
                           " -> " + std::to_string(dst_rate));
  const int64_t len = x.val().numel();
  const int64_t out_len = std::llround(static_cast<double>(len) *
                                       static_cast<double>(dst_rate) /
                                       static_cast<double>(src_rate));
  const double cutoff = std::min(1.0, static_cast<double>(dst_rate) / static_cast<double>(src_rate));
  const int64_t half_width =
      static_cast<int64_t>(std::ceil(16.0 / cutoff));  // 16 sinc zero crossings
  const double step = static_cast<double>(src_rate) / static_cast<double>(dst_rate);

  // flat tap table: (start index, taps) per output sample
  auto starts = std::make_shared<std::vector<int64_t>>(out_len);
  auto counts = std::make_shared<std::vector<int64_t>>(out_len);
  auto weights = std::make_shared<std::vector<double>>();
  weights->reserve(static_cast<size_t>(out_len * 2 * half_width));
  Tensor out({out_len});
  for (int64_t n = 0; n < out_len; ++n) {
    const double center = static_cast<double>(n) * step;
    const int64_t k0 = std::max<int64_t>(0, static_cast<int64_t>(std::ceil(center - static_cast<double>(half_width))));
    const int64_t k1 = std::min<int64_t>(len - 1, static_cast<int64_t>(std::floor(center + static_cast<double>(half_width))));
    (*starts)[static_cast<size_t>(n)] = k0;
    (*counts)[static_cast<size_t>(n)] = std::max<int64_t>(0, k1 - k0 + 1);
    double acc = 0.0;
    for (int64_t k = k0; k <= k1; ++k) {
      const double u = static_cast<double>(k) - center;
      const double w = cutoff * sinc(cutoff * u) *
                       (0.5 + 0.5 * std::cos(kPi * u / static_cast<double>(half_width)));
      weights->push_back(w);
      acc += w * x.val().data[static_cast<size_t>(k)];
    }
    out.data[static_cast<size_t>(n)] = acc;
  }
  return ad::make_op(std::move(out), {x},
                     [starts, counts, weights, out_len](ad::Node& node) {
    ad::Node* p = node.parents[0].get();
    if (!p->requires_grad) return;
    Tensor& gx = p->ensure_grad();
    size_t w_at = 0;
    for (int64_t n = 0; n < out_len; ++n) {
      const double g = node.grad.data[static_cast<size_t>(n)];
      const int64_t k0 = (*starts)[static_cast<size_t>(n)];
      for (int64_t j = 0; j < (*counts)[static_cast<size_t>(n)]; ++j)
        gx.data[static_cast<size_t>(k0 + j)] += g * (*weights)[w_at++];
    }
  });
}

Waveform resample(const Waveform& wave, int target_rate) {
  ad::NoGradGuard ng;
  Var y = resample(Var::constant(Tensor::from_vector(wave.samples)),
                   wave.sample_rate, target_rate);
  Waveform out;
  out.sample_rate = target_rate;
  out.samples = y.val().data;
  return out;
}

// ------------------------------------------------------------ features/norm

AcousticFeatures extract_features(const Waveform& wave, const DspConfig& cfg) {
  require(wave.sample_rate == cfg.sample_rate, "waveform sample rate matches config");
  const int64_t t_target = wave.size() / cfg.stft.hop;
  if (t_target < 1) throw TooShortSignal("waveform shorter than one frame hop");

  AcousticFeatures f;
  f.frame_hop = cfg.stft.hop;
  f.frame_length = cfg.stft.win_length;

  Tensor mcep = extract_mcep(wave, cfg);  // [len/hop + 1, n_mcep]
  f.mcep = Tensor({t_target, cfg.n_mcep});
  std::copy(mcep.data.begin(), mcep.data.begin() + t_target * cfg.n_mcep,
            f.mcep.data.begin());

  F0Track track = extract_f0_reference(wave, cfg.f0_min, cfg.f0_max, cfg.stft.hop);
  f.log_f0.assign(static_cast<size_t>(t_target), 0.0);
  f.vuv.assign(static_cast<size_t>(t_target), 0);
  for (int64_t t = 0; t < t_target && t < static_cast<int64_t>(track.f0.size()); ++t) {
    if (track.vuv[static_cast<size_t>(t)]) {
      f.log_f0[static_cast<size_t>(t)] = std::log(track.f0[static_cast<size_t>(t)]);
      f.vuv[static_cast<size_t>(t)] = 1;
    }
  }
  return f;
}

NormStats fit_norm_stats(const std::vector<AcousticFeatures>& corpus) {
  int64_t total_frames = 0, voiced_frames = 0;
  require(!corpus.empty(), "non-empty corpus");
  const int64_t dims = corpus.front().mcep.cols();
  NormStats s;
  s.mcep_mean.assign(static_cast<size_t>(dims), 0.0);
  s.mcep_std.assign(static_cast<size_t>(dims), 0.0);
  double lf0_sum = 0.0, lf0_sq = 0.0;

  for (const AcousticFeatures& f : corpus) {
    require(f.mcep.cols() == dims, "consistent mcep dims");
    for (int64_t t = 0; t < f.frames(); ++t)
      for (int64_t d = 0; d < dims; ++d)
        s.mcep_mean[static_cast<size_t>(d)] += f.mcep.at(t, d);
    total_frames += f.frames();
    for (size_t t = 0; t < f.log_f0.size(); ++t)
      if (f.vuv[t]) {
        lf0_sum += f.log_f0[t];
        lf0_sq += f.log_f0[t] * f.log_f0[t];
        ++voiced_frames;
      }
  }
  if (total_frames < 2) throw DegenerateDimension("need at least 2 frames");
  for (int64_t d = 0; d < dims; ++d)
    s.mcep_mean[static_cast<size_t>(d)] /= static_cast<double>(total_frames);
  for (const AcousticFeatures& f : corpus)
    for (int64_t t = 0; t < f.frames(); ++t)
      for (int64_t d = 0; d < dims; ++d) {
        const double c = f.mcep.at(t, d) - s.mcep_mean[static_cast<size_t>(d)];
        s.mcep_std[static_cast<size_t>(d)] += c * c;
      }
  for (int64_t d = 0; d < dims; ++d) {
    s.mcep_std[static_cast<size_t>(d)] =
        std::sqrt(s.mcep_std[static_cast<size_t>(d)] / static_cast<double>(total_frames));
    if (s.mcep_std[static_cast<size_t>(d)] < 1e-10)
      throw DegenerateDimension("mcep dim " + std::to_string(d) + " has zero variance");
  }
  if (voiced_frames >= 2) {
    s.lf0_mean = lf0_sum / static_cast<double>(voiced_frames);
    const double var = lf0_sq / static_cast<double>(voiced_frames) - s.lf0_mean * s.lf0_mean;
    s.lf0_std = std::sqrt(std::max(var, 0.0));
    if (s.lf0_std < 1e-10)
      throw DegenerateDimension("log-F0 has zero variance over voiced frames");
  } else if (voiced_frames == 1) {
    throw DegenerateDimension("log-F0 needs at least 2 voiced frames");
  }  // fully unvoiced corpora keep the identity stats
  return s;
}

void apply_norm(AcousticFeatures& f, const NormStats& s) {
  const int64_t dims = f.mcep.cols();
  require(static_cast<size_t>(dims) == s.mcep_mean.size(), "stats match dims");
  for (int64_t t = 0; t < f.frames(); ++t)
    for (int64_t d = 0; d < dims; ++d)
      f.mcep.at(t, d) = (f.mcep.at(t, d) - s.mcep_mean[static_cast<size_t>(d)]) /
                        s.mcep_std[static_cast<size_t>(d)];
  for (size_t t = 0; t < f.log_f0.size(); ++t)
    if (f.vuv[t]) f.log_f0[t] = (f.log_f0[t] - s.lf0_mean) / s.lf0_std;
}

void invert_norm(AcousticFeatures& f, const NormStats& s) {
  const int64_t dims = f.mcep.cols();
  require(static_cast<size_t>(dims) == s.mcep_mean.size(), "stats match dims");
  for (int64_t t = 0; t < f.frames(); ++t)
    for (int64_t d = 0; d < dims; ++d)
      f.mcep.at(t, d) = f.mcep.at(t, d) * s.mcep_std[static_cast<size_t>(d)] +
                        s.mcep_mean[static_cast<size_t>(d)];
  for (size_t t = 0; t < f.log_f0.size(); ++t)
    if (f.vuv[t]) f.log_f0[t] = f.log_f0[t] * s.lf0_std + s.lf0_mean;
}

void NormStats::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot write " + path);
  out.write("SFNS", 4);
  const uint32_t version = 1;
  const uint32_t dims = static_cast<uint32_t>(mcep_mean.size());
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&dims), 4);
  out.write(reinterpret_cast<const char*>(mcep_mean.data()), 8 * dims);
  out.write(reinterpret_cast<const char*>(mcep_std.data()), 8 * dims);
  out.write(reinterpret_cast<const char*>(&lf0_mean), 8);
  out.write(reinterpret_cast<const char*>(&lf0_std), 8);
  if (!out) throw IOError(path + ": write failed");
}

NormStats NormStats::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot read " + path);
  char magic[4];
  in.read(magic, 4);
  if (std::string(magic, 4) != "SFNS") throw IOError(path + ": bad magic");
  uint32_t version = 0, dims = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&dims), 4);
  if (version != 1)
    throw VersionMismatch(path + ": stats version " + std::to_string(version) +
                          ", expected 1");
  NormStats s;
  s.mcep_mean.resize(dims);
  s.mcep_std.resize(dims);
  in.read(reinterpret_cast<char*>(s.mcep_mean.data()), 8 * dims);
  in.read(reinterpret_cast<char*>(s.mcep_std.data()), 8 * dims);
  in.read(reinterpret_cast<char*>(&s.lf0_mean), 8);
  in.read(reinterpret_cast<char*>(&s.lf0_std), 8);
  if (!in) throw IOError(path + ": truncated");
  return s;
}

}  // namespace sfs::dsp
