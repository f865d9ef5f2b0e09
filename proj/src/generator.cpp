// src/generator.cpp
#include "sfs/generator.h"

namespace sfs {

namespace {
constexpr double kLeakySlope = 0.1;
}

Generator::Generator(nn::ParamStore& ps, const std::string& name,
                     const GeneratorConfig& cfg, int64_t latent_dim,
                     const source::SourceConfig& source_cfg, int64_t frame_hop)
    : cfg_(cfg), hop_(frame_hop) {
  require(cfg.total_upsample() == frame_hop,
          "upsample rates must multiply to the frame hop");
  source_ = source::SourceModule(ps, name + ".source", source_cfg);
  pre_ = nn::Conv1d(ps, name + ".pre", latent_dim, cfg.hidden, 7);

  int64_t ch = cfg.hidden;
  for (size_t s = 0; s < cfg.upsample_rates.size(); ++s) {
    const int64_t u = cfg.upsample_rates[s];
    const int64_t k = cfg.upsample_kernels[s];
    require((k - u) % 2 == 0, "upsample kernel minus rate must be even");
    const int64_t out_ch = std::max<int64_t>(2, ch / 2);
    ups_.emplace_back(ps, name + ".up" + std::to_string(s), ch, out_ch, k, u,
                      (k - u) / 2);
    fuse_.emplace_back(ps, name + ".fuse" + std::to_string(s), out_ch + 1,
                       out_ch, 1);
    std::vector<ResBlock> stage;
    for (size_t rk = 0; rk < cfg.resblock_kernels.size(); ++rk) {
      ResBlock block;
      const int64_t kernel = cfg.resblock_kernels[rk];
      for (size_t d = 0; d < cfg.resblock_dilations.size(); ++d) {
        const std::string base = name + ".res" + std::to_string(s) + "_" +
                                 std::to_string(rk) + "_" + std::to_string(d);
        block.dilated.emplace_back(ps, base + "a", out_ch, out_ch, kernel, 1,
                                   cfg.resblock_dilations[d]);
        block.plain.emplace_back(ps, base + "b", out_ch, out_ch, kernel, 1, 1);
      }
      stage.push_back(std::move(block));
    }
    resblocks_.push_back(std::move(stage));
    ch = out_ch;
  }
  post_ = nn::Conv1d(ps, name + ".post", ch, 1, 7);
}

ad::Var Generator::ResBlock::forward(const ad::Var& x) const {
  ad::Var h = x;
  for (size_t i = 0; i < dilated.size(); ++i) {
    ad::Var t = dilated[i].forward(ad::leaky_relu(h, kLeakySlope));
    t = plain[i].forward(ad::leaky_relu(t, kLeakySlope));
    h = ad::add(h, t);
  }
  return h;
}

ad::Var Generator::sample_excitation(const std::vector<double>& frame_f0,
                                     Rng& rng, bool random_phase) const {
  return source_.sample_excitation(source::upsample_f0(frame_f0, hop_), rng,
                                   random_phase);
}

ad::Var Generator::forward(const ad::Var& z, const std::vector<double>& frame_f0,
                           Rng& rng, bool random_phase) const {
  if (static_cast<int64_t>(frame_f0.size()) != z.val().rows())
    throw FrameMisalignment("frame F0 length must match latent frames");
  return forward_with_excitation(z, sample_excitation(frame_f0, rng, random_phase));
}

ad::Var Generator::forward_with_excitation(const ad::Var& z,
                                           const ad::Var& excitation) const {
  const int64_t t_frames = z.val().rows();
  if (excitation.val().rows() != t_frames * hop_)
    throw FrameMisalignment("excitation must be sample rate (frames * hop)");

  ad::Var x = pre_.forward(z);
  int64_t scale = 1;
  for (size_t s = 0; s < ups_.size(); ++s) {
    x = ups_[s].forward(ad::leaky_relu(x, kLeakySlope));
    scale *= cfg_.upsample_rates[s];
    // excitation pooled down to this stage's resolution, fused as a channel
    ad::Var exc = excitation;
    if (hop_ / scale > 1) exc = ad::avg_pool_rows(excitation, hop_ / scale);
    x = fuse_[s].forward(ad::concat_cols({x, exc}));
    ad::Var acc;
    for (const ResBlock& block : resblocks_[s]) {
      ad::Var r = block.forward(x);
      acc = acc.defined() ? ad::add(acc, r) : r;
    }
    x = ad::smul(acc, 1.0 / static_cast<double>(resblocks_[s].size()));
  }
  return ad::tanh_act(post_.forward(ad::leaky_relu(x, kLeakySlope)));
}

}  // namespace sfs
