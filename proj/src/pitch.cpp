// src/pitch.cpp
#include "sfs/pitch.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sfs/checkpoint.h"
#include "sfs/optim.h"

namespace sfs::pitch {

PitchBins PitchBins::make(int64_t n_bins) {
  PitchBins b;
  b.n_bins = n_bins;
  const double c1_hz = 32.70319566257483;  // C1
  const double base_cents = hz_to_cents(c1_hz);
  for (int64_t i = 0; i < n_bins; ++i) {
    const double c = base_cents + 20.0 * static_cast<double>(i);
    b.cents.push_back(c);
    b.center_hz.push_back(cents_to_hz(c));
  }
  return b;
}

Var decode_f0_weighted(const Var& probs, const PitchBins& bins) {
  if (probs.val().cols() != bins.n_bins)
    throw ShapeMismatch("probability rows must have " +
                        std::to_string(bins.n_bins) + " bins");
  for (int64_t t = 0; t < probs.val().rows(); ++t) {
    double s = 0.0;
    for (int64_t k = 0; k < bins.n_bins; ++k) s += probs.val().at(t, k);
    if (std::fabs(s - 1.0) > 1e-6)
      throw NotNormalized("row " + std::to_string(t) + " sums to " +
                          std::to_string(s));
  }
  Tensor cents({bins.n_bins, 1});
  for (int64_t k = 0; k < bins.n_bins; ++k) cents.data[static_cast<size_t>(k)] = bins.cents[static_cast<size_t>(k)];
  Var mean_cents = ad::matmul(probs, Var::constant(std::move(cents)));  // [T,1]
  // Hz = 10 * 2^(cents/1200)
  const double k = std::log(2.0) / 1200.0;
  return ad::smul(ad::exp_(ad::smul(mean_cents, k)), 10.0);
}

namespace {

struct LayerSpec {
  int64_t out, kernel, stride, pad;
};

std::vector<LayerSpec> layer_specs(double scale) {
  auto ch = [scale](int64_t c) {
    return std::max<int64_t>(4, static_cast<int64_t>(std::lround(c * scale)));
  };
  // 1024-sample window collapses to a single position after five stride-4 convs
  return {{ch(64), 64, 4, 30},
          {ch(64), 32, 4, 14},
          {ch(128), 16, 4, 6},
          {ch(256), 8, 4, 2},
          {ch(512), 4, 4, 0}};
}

}  // namespace

PitchNet::PitchNet(const PitchNetConfig& cfg, uint64_t init_seed)
    : cfg_(cfg), bins_(PitchBins::make(cfg.n_bins)), store_(init_seed) {
  int64_t in_ch = 1;
  const auto specs = layer_specs(cfg.channel_scale);
  for (size_t i = 0; i < specs.size(); ++i) {
    const auto& s = specs[i];
    const std::string base = "pitch.conv" + std::to_string(i);
    convs_.emplace_back(store_, base, in_ch, s.out, s.kernel, s.stride, 1, s.pad);
    norms_.emplace_back(store_, base + ".ln", s.out);
    in_ch = s.out;
  }
  head_ = nn::Linear(store_, "pitch.head", in_ch, cfg.n_bins);
}

Var PitchNet::probabilities(const Var& wave16k, int sample_rate) const {
  if (sample_rate != cfg_.sample_rate)
    throw WrongSampleRate("pitch net expects " + std::to_string(cfg_.sample_rate) +
                          " Hz, got " + std::to_string(sample_rate));
  return probabilities(wave16k);
}

Var PitchNet::probabilities(const Var& wave16k) const {
  const int64_t len = wave16k.val().numel();
  if (len < cfg_.window)
    throw TooShortSignal("need at least " + std::to_string(cfg_.window) +
                         " samples, got " + std::to_string(len));
  const int64_t t_frames = num_frames(len);

  // center frames at t*hop with reflection, one column per sample
  std::vector<int64_t> idx;
  idx.reserve(static_cast<size_t>(t_frames * cfg_.window));
  for (int64_t t = 0; t < t_frames; ++t)
    for (int64_t j = 0; j < cfg_.window; ++j) {
      int64_t i = t * cfg_.hop - cfg_.window / 2 + j;
      while (i < 0 || i >= len) {
        if (i < 0) i = -i;
        if (i >= len) i = 2 * len - 2 - i;
      }
      idx.push_back(i);
    }
  Var frames = ad::reshape(
      ad::gather_rows(ad::reshape(wave16k, {len, 1}), std::move(idx)),
      {t_frames, cfg_.window});

  std::vector<Var> rows;
  rows.reserve(static_cast<size_t>(t_frames));
  for (int64_t t = 0; t < t_frames; ++t) {
    Var row = ad::slice_rows(frames, t, t + 1);  // [1, window]
    // per-frame normalization makes the classifier gain-invariant
    Var centered = ad::sub_colvec(row, ad::row_mean(row));
    Var var = ad::row_mean(ad::square(centered));
    Var inv_std = ad::recip(ad::sqrt_(ad::sadd(var, 1e-10)));
    Var h = ad::reshape(ad::mul_colvec(centered, inv_std), {cfg_.window, 1});
    for (size_t l = 0; l < convs_.size(); ++l)
      h = ad::relu(norms_[l].forward(convs_[l].forward(h)));
    rows.push_back(h);  // [1, C]
  }
  Var feats = ad::concat_rows(rows);
  return ad::softmax_rows(head_.forward(feats));
}

void PitchNet::set_frozen(bool frozen) {
  frozen_ = frozen;
  store_.set_requires_grad(!frozen);
}

void PitchNet::save(const std::string& path) const {
  char meta[160];
  std::snprintf(meta, sizeof(meta),
                "{\"sample_rate\":%d,\"window\":%lld,\"hop\":%lld,\"n_bins\":%lld,"
                "\"channel_scale\":%g}",
                cfg_.sample_rate, static_cast<long long>(cfg_.window),
                static_cast<long long>(cfg_.hop),
                static_cast<long long>(cfg_.n_bins), cfg_.channel_scale);
  ckpt::save(path, "pitch_net", meta, store_.params());
}

void PitchNet::load(const std::string& path) {
  try {
    ckpt::load(path, "pitch_net", store_.params());
  } catch (const CorruptCheckpoint&) {
    const std::string meta = ckpt::peek_meta(path, "pitch_net");
    throw CorruptCheckpoint(path +
                            ": architecture mismatch; the checkpoint was "
                            "trained with " +
                            meta + " — align the pitch config");
  }
}

std::vector<double> synth_tone(double f0_hz, int64_t n_samples, int sample_rate,
                               Rng& rng, double snr_db) {
  const int64_t n_harm = rng.randint(1, 8);
  std::vector<double> amps, phases;
  double power = 0.0;
  for (int64_t h = 0; h < n_harm; ++h) {
    const double a = rng.uniform(0.2, 1.0) / static_cast<double>(h + 1);
    amps.push_back(a);
    phases.push_back(rng.uniform(-kPi, kPi));
    power += 0.5 * a * a;
  }
  const double noise_std = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
  std::vector<double> x(static_cast<size_t>(n_samples));
  for (int64_t i = 0; i < n_samples; ++i) {
    double v = 0.0;
    for (int64_t h = 0; h < n_harm; ++h) {
      const double f = f0_hz * static_cast<double>(h + 1);
      if (f >= sample_rate / 2.0) break;
      v += amps[static_cast<size_t>(h)] *
           std::sin(2.0 * kPi * f * static_cast<double>(i) / sample_rate +
                    phases[static_cast<size_t>(h)]);
    }
    x[static_cast<size_t>(i)] = 0.4 * v + rng.normal(0.0, noise_std);
  }
  return x;
}

PretrainReport pretrain(PitchNet& net, int64_t n_tones, int64_t epochs,
                        double lr, uint64_t seed, double f_lo, double f_hi,
                        int64_t batch, bool verbose) {
  net.set_frozen(false);
  Rng rng(seed);
  const auto& bins = net.bins();
  const int64_t window = net.config().window;
  const int sr = net.config().sample_rate;

  // one analysis frame per tone
  struct Sample {
    std::vector<double> wave;
    double cents;
  };
  std::vector<Sample> train, heldout;
  const int64_t n_heldout = std::max<int64_t>(64, n_tones / 10);
  for (int64_t i = 0; i < n_tones + n_heldout; ++i) {
    const double f0 = std::exp(rng.uniform(std::log(f_lo), std::log(f_hi)));
    Sample s;
    s.wave = synth_tone(f0, window, sr, rng, rng.uniform(20.0, 40.0));
    s.cents = hz_to_cents(f0);
    (i < n_tones ? train : heldout).push_back(std::move(s));
  }

  // cent-smeared soft targets (sigma = 25 cents)
  auto target_row = [&](double cents) {
    std::vector<double> row(static_cast<size_t>(bins.n_bins));
    double sum = 0.0;
    for (int64_t k = 0; k < bins.n_bins; ++k) {
      const double d = (bins.cents[static_cast<size_t>(k)] - cents) / 25.0;
      row[static_cast<size_t>(k)] = std::exp(-0.5 * d * d);
      sum += row[static_cast<size_t>(k)];
    }
    for (double& v : row) v /= sum;
    return row;
  };

  optim::AdamW opt(net.store().params(), lr, 0.9, 0.999, 0.0);
  PretrainReport report;
  std::vector<int64_t> order(static_cast<size_t>(n_tones));
  for (int64_t i = 0; i < n_tones; ++i) order[static_cast<size_t>(i)] = i;

  for (int64_t epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng.engine());
    double epoch_loss = 0.0;
    int64_t count = 0;
    for (int64_t at = 0; at < n_tones; at += batch) {
      const int64_t b_end = std::min<int64_t>(n_tones, at + batch);
      Var total;
      for (int64_t b = at; b < b_end; ++b) {
        const Sample& s = train[static_cast<size_t>(order[static_cast<size_t>(b)])];
        Var probs = net.probabilities(
            Var::constant(Tensor::from_vector(s.wave)));
        Var logp = ad::log_(ad::sadd(probs, 1e-12));
        // every analysis frame of the tone shares the same target
        const auto row = target_row(s.cents);
        Tensor target({probs.val().rows(), bins.n_bins});
        for (int64_t t = 0; t < probs.val().rows(); ++t)
          std::copy(row.begin(), row.end(),
                    target.data.begin() + t * bins.n_bins);
        Var ce = ad::smul(
            ad::neg(ad::sum_all(ad::mul(Var::constant(std::move(target)), logp))),
            1.0 / static_cast<double>(probs.val().rows()));
        total = total.defined() ? ad::add(total, ce) : ce;
      }
      total = ad::smul(total, 1.0 / static_cast<double>(b_end - at));
      opt.zero_grad();
      ad::backward(total);
      opt.step();
      epoch_loss += total.item() * static_cast<double>(b_end - at);
      count += b_end - at;
    }
    report.final_loss = epoch_loss / static_cast<double>(count);
    if (verbose)
      std::fprintf(stderr, "pitch pretrain epoch %lld: loss %.4f\n",
                   static_cast<long long>(epoch), report.final_loss);
  }

  // held-out accuracy of the weighted-sum decoder, counted per frame
  int64_t hits = 0, frames = 0;
  {
    ad::NoGradGuard ng;
    for (const Sample& s : heldout) {
      Var probs = net.probabilities(Var::constant(Tensor::from_vector(s.wave)));
      Var hz = decode_f0_weighted(probs, bins);
      for (int64_t t = 0; t < hz.val().rows(); ++t) {
        const double cents = hz_to_cents(hz.val().at(t, 0));
        if (std::fabs(cents - s.cents) <= 50.0) ++hits;
        ++frames;
      }
    }
  }
  report.heldout_within_50c =
      static_cast<double>(hits) / static_cast<double>(frames);
  return report;
}

}  // namespace sfs::pitch
