// src/source.cpp
#include "sfs/source.h"

#include <cmath>

namespace sfs::source {

Tensor generate_excitation(const std::vector<double>& f0, const SourceConfig& cfg,
                           Rng& rng, bool random_phase) {
  cfg.validate();
  for (double f : f0)
    if (f < 0.0) throw NegativeF0("f0 value " + std::to_string(f));

  const int64_t t_steps = static_cast<int64_t>(f0.size());
  const int64_t n_br = cfg.branches();
  Tensor out({t_steps, n_br});

  std::vector<double> phase0(static_cast<size_t>(n_br), 0.0);
  if (random_phase)
    for (double& p : phase0) p = rng.uniform(-kPi, kPi);

  double phase_acc = 0.0;  // cumulative 2*pi*f_k/N_s including the current step
  const double inv_unvoiced = 1.0 / (3.0 * cfg.sigma);
  for (int64_t t = 0; t < t_steps; ++t) {
    phase_acc += 2.0 * kPi * f0[static_cast<size_t>(t)] / static_cast<double>(cfg.sample_rate);
    const bool voiced = f0[static_cast<size_t>(t)] > 0.0;
    for (int64_t b = 0; b < n_br; ++b) {
      const double noise = rng.normal(0.0, cfg.sigma);
      out.data[static_cast<size_t>(t * n_br + b)] =
          voiced ? cfg.alpha * std::sin(static_cast<double>(b + 1) * phase_acc +
                                        phase0[static_cast<size_t>(b)]) +
                       noise
                 : inv_unvoiced * noise;
    }
  }
  return out;
}

std::vector<double> upsample_f0(const std::vector<double>& frame_f0, int64_t hop) {
  require(hop > 0, "positive hop");
  const int64_t t_frames = static_cast<int64_t>(frame_f0.size());
  std::vector<double> out(static_cast<size_t>(t_frames * hop), 0.0);
  for (int64_t t = 0; t < t_frames; ++t) {
    const double cur = frame_f0[static_cast<size_t>(t)];
    if (cur <= 0.0) continue;  // unvoiced frames stay exactly zero
    const double next =
        (t + 1 < t_frames) ? frame_f0[static_cast<size_t>(t + 1)] : 0.0;
    for (int64_t j = 0; j < hop; ++j) {
      // interpolate toward the next frame only across voiced-voiced pairs
      const double frac = static_cast<double>(j) / static_cast<double>(hop);
      out[static_cast<size_t>(t * hop + j)] =
          next > 0.0 ? cur + (next - cur) * frac : cur;
    }
  }
  return out;
}

SourceModule::SourceModule(nn::ParamStore& ps, const std::string& name,
                           SourceConfig cfg)
    : cfg_(cfg) {
  cfg_.validate();
  merge_ = nn::Linear(ps, name + ".merge", cfg_.branches(), 1);
  merge_.b.val().fill(0.0);  // unvoiced excitation starts zero-mean
}

Var SourceModule::merge(const Var& branches) const {
  if (branches.val().cols() != cfg_.branches())
    throw ShapeMismatch("merge expects " + std::to_string(cfg_.branches()) +
                        " branches, got " + std::to_string(branches.val().cols()));
  return ad::tanh_act(merge_.forward(branches));
}

Var SourceModule::sample_excitation(const std::vector<double>& sample_f0,
                                    Rng& rng, bool random_phase) const {
  Tensor branches = generate_excitation(sample_f0, cfg_, rng, random_phase);
  return merge(Var::constant(std::move(branches)));
}

Var SourceModule::frame_excitation(const std::vector<double>& frame_f0,
                                   int64_t hop, Rng& rng,
                                   bool random_phase) const {
  Var merged = sample_excitation(upsample_f0(frame_f0, hop), rng, random_phase);
  return ad::avg_pool_rows(merged, hop);
}

ExcitationSignal SourceModule::render(const std::vector<double>& sample_f0,
                                      double rate, Rng& rng,
                                      bool random_phase) const {
  ad::NoGradGuard ng;
  ExcitationSignal sig;
  sig.rate = rate;
  sig.branches = generate_excitation(sample_f0, cfg_, rng, random_phase);
  sig.merged = merge(Var::constant(sig.branches)).val();
  return sig;
}

}  // namespace sfs::source
