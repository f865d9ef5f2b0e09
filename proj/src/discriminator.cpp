// src/discriminator.cpp
#include "sfs/discriminator.h"

#include <cmath>

namespace sfs {

namespace {
constexpr double kLeakySlope = 0.1;

int64_t scaled(int64_t base, double scale) {
  return std::max<int64_t>(2, static_cast<int64_t>(std::lround(base * scale)));
}
}  // namespace

DiscriminatorSet::DiscriminatorSet(nn::ParamStore& ps, const std::string& name,
                                   const DiscriminatorConfig& cfg) {
  const int64_t pc[4] = {scaled(32, cfg.channel_scale), scaled(128, cfg.channel_scale),
                         scaled(512, cfg.channel_scale), scaled(1024, cfg.channel_scale)};
  for (size_t i = 0; i < cfg.periods.size(); ++i) {
    PeriodDisc d;
    d.period = cfg.periods[i];
    const std::string base = name + ".period" + std::to_string(d.period);
    int64_t in_ch = 1;
    for (int l = 0; l < 4; ++l) {
      d.convs.emplace_back(ps, base + ".conv" + std::to_string(l), in_ch, pc[l],
                           5, 1, 3, 1, 2, 0);
      in_ch = pc[l];
    }
    d.convs.emplace_back(ps, base + ".conv4", in_ch, in_ch, 5, 1, 1, 1, 2, 0);
    d.post = nn::Conv2d(ps, base + ".post", in_ch, 1, 3, 1, 1, 1, 1, 0);
    periods_.push_back(std::move(d));
  }

  const int64_t sc = scaled(32, cfg.channel_scale);
  for (size_t i = 0; i < cfg.resolutions.size(); ++i) {
    SpectrogramDisc d;
    d.resolution = cfg.resolutions[i];
    const std::string base = name + ".spec" + std::to_string(d.resolution);
    d.convs.emplace_back(ps, base + ".conv0", 1, sc, 3, 9, 1, 1, 1, 4);
    for (int l = 1; l <= 3; ++l)
      d.convs.emplace_back(ps, base + ".conv" + std::to_string(l), sc, sc, 3, 9,
                           1, 2, 1, 4);
    d.convs.emplace_back(ps, base + ".conv4", sc, sc, 3, 3, 1, 1, 1, 1);
    d.post = nn::Conv2d(ps, base + ".post", sc, 1, 3, 3, 1, 1, 1, 1);
    resolutions_.push_back(std::move(d));
  }
}

DiscOutput DiscriminatorSet::run_period(const PeriodDisc& d,
                                        const ad::Var& wave) const {
  const int64_t len = wave.val().rows();
  if (len < d.period * 2)
    throw TooShortSignal("period discriminator needs >= " +
                         std::to_string(2 * d.period) + " samples");
  // pad to a multiple of the period (repeat-reflect the tail), then fold
  const int64_t rows = (len + d.period - 1) / d.period;
  std::vector<int64_t> idx;
  idx.reserve(static_cast<size_t>(rows * d.period));
  for (int64_t i = 0; i < rows * d.period; ++i) {
    int64_t j = i;
    if (j >= len) j = 2 * len - 2 - j;
    idx.push_back(j);
  }
  ad::Var folded = ad::reshape(ad::gather_rows(wave, std::move(idx)),
                               {rows, d.period, 1});

  DiscOutput out;
  ad::Var h = folded;
  for (const nn::Conv2d& conv : d.convs) {
    h = ad::leaky_relu(conv.forward(h), kLeakySlope);
    out.feats.push_back(h);
  }
  h = d.post.forward(h);
  out.feats.push_back(h);
  out.score = ad::reshape(h, {h.val().numel(), 1});
  return out;
}

DiscOutput DiscriminatorSet::run_spectrogram(const SpectrogramDisc& d,
                                             const ad::Var& wave) const {
  dsp::StftConfig stft;
  stft.fft_size = d.resolution;
  stft.win_length = d.resolution;
  stft.hop = d.resolution / 4;
  ad::Var mag = dsp::stft_magnitude(
      ad::reshape(wave, {wave.val().numel()}), stft);  // [T, bins]
  ad::Var h = ad::reshape(mag, {mag.val().rows(), mag.val().cols(), 1});

  DiscOutput out;
  for (const nn::Conv2d& conv : d.convs) {
    h = ad::leaky_relu(conv.forward(h), kLeakySlope);
    out.feats.push_back(h);
  }
  h = d.post.forward(h);
  out.feats.push_back(h);
  out.score = ad::reshape(h, {h.val().numel(), 1});
  return out;
}

std::vector<DiscOutput> DiscriminatorSet::forward(const ad::Var& wave) const {
  std::vector<DiscOutput> outs;
  outs.reserve(static_cast<size_t>(count()));
  for (const PeriodDisc& d : periods_) outs.push_back(run_period(d, wave));
  for (const SpectrogramDisc& d : resolutions_)
    outs.push_back(run_spectrogram(d, wave));
  return outs;
}

}  // namespace sfs
