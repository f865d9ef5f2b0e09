// src/train.cpp
#include "sfs/train.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sfs/checkpoint.h"

namespace sfs::train {

using nlohmann::json;

double LossBundle::at(const std::string& k) const {
  auto it = values.find(k);
  require(it != values.end(), "loss term present");
  return it->second;
}

bool LossBundle::finite() const {
  for (const auto& [k, v] : values)
    if (!std::isfinite(v)) return false;
  return true;
}

void LossBundle::check_finite() const {
  for (const auto& [k, v] : values)
    if (!std::isfinite(v)) throw NonFiniteLoss("loss term " + k + " is not finite");
}

std::string LossBundle::to_json(int64_t step) const {
  json j;
  j["step"] = step;
  for (const auto& [k, v] : values) j[k] = v;
  return j.dump();
}

namespace {

void set_requires_grad_prefix(nn::ParamStore& store, const std::string& prefix,
                              bool on) {
  for (const auto& [name, p] : store.params())
    if (name.rfind(prefix, 0) == 0) p.node()->requires_grad = on;
}

std::vector<char> note_vuv(const score::ScoreTokens& tokens,
                           const std::vector<int64_t>& durations) {
  std::vector<char> vuv;
  for (size_t i = 0; i < durations.size(); ++i)
    for (int64_t j = 0; j < durations[i]; ++j)
      vuv.push_back(tokens.midi_ids[i] > 0 ? 1 : 0);
  return vuv;
}

}  // namespace

Trainer::Trainer(const Config& cfg, data::Dataset dataset,
                 pitch::PitchNet pitch_net)
    : cfg_(cfg), dataset_(std::move(dataset)), pitch_(std::move(pitch_net)),
      model_(cfg, dataset_.phoneme_vocab.size(), dataset_.note_vocab.size(),
             cfg.train.seed),
      rng_(cfg.train.seed + 1) {
  pitch_.set_frozen(true);
  gen_opt_ = optim::AdamW(optim::select_params(model_.store(), "discriminator.", true),
                          cfg_.train.lr, cfg_.train.beta1, cfg_.train.beta2,
                          cfg_.train.weight_decay);
  disc_opt_ = optim::AdamW(optim::select_params(model_.store(), "discriminator."),
                           cfg_.train.lr, cfg_.train.beta1, cfg_.train.beta2,
                           cfg_.train.weight_decay);
  order_.resize(dataset_.utts.size());
  for (size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  std::shuffle(order_.begin(), order_.end(), rng_.engine());
}

LossBundle Trainer::train_step() {
  nn::RunState rs{true, &rng_};
  const int64_t hop = cfg_.dsp.stft.hop;
  const int64_t seg_frames = std::max<int64_t>(1, cfg_.train.segment_samples / hop);

  struct Fwd {
    const data::Utterance* utt = nullptr;
    LatentSequence q;
    PriorForward pf;
    ad::Var y_hat, y_seg;
    std::vector<char> vuv_seg;
    ad::Var l_kl, l_am, l_dur;
  };
  std::vector<Fwd> fwds;

  for (int64_t b = 0; b < cfg_.train.batch_size; ++b) {
    if (order_at_ >= order_.size()) {
      std::shuffle(order_.begin(), order_.end(), rng_.engine());
      order_at_ = 0;
      ++epoch_;
      const double lr = cfg_.train.lr * std::pow(cfg_.train.lr_decay,
                                                 static_cast<double>(epoch_));
      gen_opt_.set_lr(lr);
      disc_opt_.set_lr(lr);
    }
    Fwd f;
    f.utt = &dataset_.utts[order_[order_at_++]];
    const data::Utterance& u = *f.utt;
    const int64_t t_frames = u.features.frames();

    f.q = model_.posterior().forward(u.features.mcep, u.features.log_f0,
                                     u.features.vuv);
    f.q.sample(rng_);
    f.pf = model_.prior().forward(u.tokens, u.tokens.duration_frames,
                                  u.features.vuv, dataset_.stats, rng_, rs,
                                  /*random_phase=*/true);

    Tensor lf0_target({t_frames, 1});
    for (int64_t t = 0; t < t_frames; ++t)
      lf0_target.data[static_cast<size_t>(t)] = u.features.log_f0[static_cast<size_t>(t)];
    f.l_am = losses::am_loss(f.pf.lf0_pred, f.pf.mcep_pred,
                             ad::Var::constant(std::move(lf0_target)),
                             ad::Var::constant(u.features.mcep), u.features.vuv,
                             {}, cfg_.loss.lambda1, cfg_.loss.lambda2);
    f.l_dur = losses::duration_loss(f.pf.log_durations, u.tokens.duration_frames,
                                    u.tokens.note_duration_frames, {});
    f.l_kl = losses::kl_loss(f.q, f.pf.prior, {});

    // random training segment, frame-aligned to the waveform
    int64_t t0 = 0, s_frames = t_frames;
    if (t_frames > seg_frames) {
      t0 = rng_.randint(0, t_frames - seg_frames);
      s_frames = seg_frames;
    }
    ad::Var z_seg = ad::slice_rows(f.q.z, t0, t0 + s_frames);
    std::vector<double> f0_seg(u.f0_hz.begin() + t0,
                               u.f0_hz.begin() + t0 + s_frames);
    f.vuv_seg.assign(u.features.vuv.begin() + t0,
                     u.features.vuv.begin() + t0 + s_frames);
    Tensor y_seg({s_frames * hop, 1});
    std::copy(u.wave.samples.begin() + t0 * hop,
              u.wave.samples.begin() + (t0 + s_frames) * hop, y_seg.data.begin());
    f.y_seg = ad::Var::constant(std::move(y_seg));
    f.y_hat = model_.generator().forward(z_seg, f0_seg, rng_, /*random_phase=*/true);
    fwds.push_back(std::move(f));
  }
  const double inv_b = 1.0 / static_cast<double>(fwds.size());

  // ---- discriminator update (generator output detached) ----
  ad::Var d_total;
  for (Fwd& f : fwds) {
    auto real = model_.discriminator().forward(f.y_seg);
    auto fake = model_.discriminator().forward(f.y_hat.detach());
    ad::Var d = losses::discriminator_loss(real, fake);
    d_total = d_total.defined() ? ad::add(d_total, d) : d;
  }
  d_total = ad::smul(d_total, inv_b);
  disc_opt_.zero_grad();
  ad::backward(d_total);
  disc_opt_.clip_grad_norm(cfg_.train.grad_clip);
  disc_opt_.step();
  disc_opt_.zero_grad();  // consumed; anything present later is a leak

  // ---- generator-side update against the refreshed discriminator ----
  set_requires_grad_prefix(model_.store(), "discriminator.", false);
  LossBundle bundle;
  auto log_term = [&](const char* k, double v) { bundle.values[k] += v * inv_b; };
  bundle.values["L_adv_D"] = d_total.item();

  ad::Var g_total;
  for (Fwd& f : fwds) {
    auto real = model_.discriminator().forward(f.y_seg);
    auto fake = model_.discriminator().forward(f.y_hat);
    ad::Var l_adv_g = losses::adversarial_loss(fake);
    ad::Var l_fm = losses::feature_matching_loss(real, fake);
    ad::Var l_mel = losses::mel_loss(
        ad::reshape(f.y_hat, {f.y_hat.val().numel()}),
        ad::reshape(f.y_seg, {f.y_seg.val().numel()}), cfg_.dsp);
    ad::Var l_g = losses::generator_loss(l_adv_g, l_mel, l_fm,
                                         cfg_.loss.lambda_mel, cfg_.loss.lambda_fm);

    ad::Var total = ad::add(ad::add(l_g, f.l_kl), ad::add(f.l_am, f.l_dur));
    if (!cfg_.train.no_diff_recon) {
      ad::Var l_mcep = losses::mcep_recon_loss(f.y_hat, f.y_seg, cfg_.dsp,
                                               cfg_.loss.lambda_mcep);
      ad::Var l_f0 = losses::f0_recon_loss(f.y_hat, f.y_seg, cfg_.dsp.sample_rate,
                                           pitch_, cfg_.loss.lambda_f0,
                                           f.vuv_seg, hop);
      total = ad::add(total, ad::add(l_mcep, l_f0));
      log_term("L_mcep", l_mcep.item());
      log_term("L_F0", l_f0.item());
    }
    log_term("L_G", l_g.item());
    log_term("L_adv_G", l_adv_g.item());
    log_term("L_mel", l_mel.item());
    log_term("L_fm", l_fm.item());
    log_term("L_kl", f.l_kl.item());
    log_term("L_am", f.l_am.item());
    log_term("L_dur", f.l_dur.item());
    log_term("L_total", total.item());
    g_total = g_total.defined() ? ad::add(g_total, total) : total;
  }
  g_total = ad::smul(g_total, inv_b);
  gen_opt_.zero_grad();
  ad::backward(g_total);
  gen_opt_.clip_grad_norm(cfg_.train.grad_clip);
  gen_opt_.step();
  gen_opt_.zero_grad();
  set_requires_grad_prefix(model_.store(), "discriminator.", true);

  ++step_;
  bundle.check_finite();
  return bundle;
}

void Trainer::run(int64_t steps, const std::string& out_dir,
                  const std::string& log_path) {
  std::ofstream log;
  if (!log_path.empty()) {
    log.open(log_path, std::ios::app);
    if (!log) throw IOError("cannot open log " + log_path);
  }
  namespace fs = std::filesystem;
  if (!out_dir.empty()) fs::create_directories(out_dir);

  for (int64_t i = 0; i < steps; ++i) {
    LossBundle b = train_step();
    if (log.is_open() &&
        (step_ % cfg_.train.log_every == 0 || i == 0 || i + 1 == steps))
      log << b.to_json(step_) << '\n' << std::flush;
    if (!out_dir.empty() && cfg_.train.checkpoint_every > 0 &&
        step_ % cfg_.train.checkpoint_every == 0)
      save_checkpoint((fs::path(out_dir) / ("ckpt_" + std::to_string(step_) + ".bin")).string());
  }
  if (!out_dir.empty())
    save_checkpoint((fs::path(out_dir) / "ckpt_final.bin").string());
}

Waveform Trainer::synthesize(const score::ScoreTokens& tokens,
                             const std::vector<int64_t>* gt_durations,
                             double noise_scale, uint64_t seed) {
  ad::NoGradGuard ng;
  Rng rng(seed);
  nn::RunState rs{false, &rng};

  std::vector<int64_t> durations;
  if (gt_durations) {
    durations = *gt_durations;
  } else {
    ad::Var enc = model_.prior().encode_score(tokens.phoneme_ids, tokens.note_ids,
                                              tokens.slur_ids, -1, rs);
    ad::Var log_dur = model_.prior().predict_duration(enc, rs);
    durations = PriorEncoder::durations_from_log(log_dur.val());
  }
  const std::vector<char> vuv = note_vuv(tokens, durations);

  PriorForward pf = model_.prior().forward(tokens, durations, vuv, dataset_.stats,
                                           rng, rs, /*random_phase=*/false);
  pf.prior.sample(rng, noise_scale);

  const int64_t t_frames = pf.prior.frames();
  std::vector<double> f0_hz(static_cast<size_t>(t_frames), 0.0);
  for (int64_t t = 0; t < t_frames; ++t)
    if (vuv[static_cast<size_t>(t)]) {
      const double lf0 = pf.lf0_pred.val().at(t, 0) * dataset_.stats.lf0_std +
                         dataset_.stats.lf0_mean;
      f0_hz[static_cast<size_t>(t)] = std::clamp(std::exp(lf0), 30.0, 4000.0);
    }

  ad::Var wave = model_.generator().forward(pf.prior.z, f0_hz, rng,
                                            /*random_phase=*/false);
  Waveform out;
  out.sample_rate = cfg_.dsp.sample_rate;
  out.samples = wave.val().data;
  return out;
}

std::string Trainer::meta_json() const {
  json meta;
  meta["config"] = json::parse(cfg_.to_json());
  meta["step"] = step_;
  json ph = json::array(), nt = json::array();
  for (int64_t i = 1; i < dataset_.phoneme_vocab.size(); ++i)
    ph.push_back(dataset_.phoneme_vocab.symbol(i));
  for (int64_t i = 1; i < dataset_.note_vocab.size(); ++i)
    nt.push_back(dataset_.note_vocab.symbol(i));
  meta["phonemes"] = ph;
  meta["notes"] = nt;
  meta["stats"] = {{"mcep_mean", dataset_.stats.mcep_mean},
                   {"mcep_std", dataset_.stats.mcep_std},
                   {"lf0_mean", dataset_.stats.lf0_mean},
                   {"lf0_std", dataset_.stats.lf0_std}};
  return meta.dump();
}

void Trainer::save_checkpoint(const std::string& path) const {
  ckpt::save(path, "svs_model", meta_json(), model_.store().params(),
             [this](std::ostream& out) {
               std::ostringstream blob;
               gen_opt_.serialize(blob);
               disc_opt_.serialize(blob);
               blob.write(reinterpret_cast<const char*>(&step_), 8);
               blob.write(reinterpret_cast<const char*>(&epoch_), 8);
               const std::string s = blob.str();
               const uint64_t len = s.size();
               out.write(reinterpret_cast<const char*>(&len), 8);
               out.write(s.data(), static_cast<std::streamsize>(len));
             });
}

void Trainer::load_checkpoint(const std::string& path) {
  ckpt::load(path, "svs_model", model_.store().params(),
             [this](std::istream& in) {
               uint64_t len = 0;
               in.read(reinterpret_cast<char*>(&len), 8);
               std::string s(len, '\0');
               in.read(s.data(), static_cast<std::streamsize>(len));
               std::istringstream blob(s);
               gen_opt_.deserialize(blob);
               disc_opt_.deserialize(blob);
               blob.read(reinterpret_cast<char*>(&step_), 8);
               blob.read(reinterpret_cast<char*>(&epoch_), 8);
             });
}

struct LoadedModelInit {
  std::string path;
  Config cfg;
  score::Vocab phoneme_vocab, note_vocab;
  dsp::NormStats stats;
  int64_t step = 0;
};

namespace {

score::Vocab vocab_from_json(const json& arr) {
  std::vector<std::string> symbols;
  for (const auto& s : arr) symbols.push_back(s.get<std::string>());
  return score::Vocab(symbols);
}

LoadedModelInit parse_meta(const std::string& path) {
  const json meta = json::parse(ckpt::peek_meta(path, "svs_model"));
  LoadedModelInit init;
  init.path = path;
  init.cfg = Config::from_json(meta.at("config").dump());
  init.phoneme_vocab = vocab_from_json(meta.at("phonemes"));
  init.note_vocab = vocab_from_json(meta.at("notes"));
  const json& st = meta.at("stats");
  init.stats.mcep_mean = st.at("mcep_mean").get<std::vector<double>>();
  init.stats.mcep_std = st.at("mcep_std").get<std::vector<double>>();
  init.stats.lf0_mean = st.at("lf0_mean").get<double>();
  init.stats.lf0_std = st.at("lf0_std").get<double>();
  init.step = meta.at("step").get<int64_t>();
  return init;
}

}  // namespace

LoadedModel::LoadedModel(const std::string& ckpt_path)
    : LoadedModel(parse_meta(ckpt_path)) {}

LoadedModel::LoadedModel(LoadedModelInit&& init)
    : cfg(init.cfg), phoneme_vocab(std::move(init.phoneme_vocab)),
      note_vocab(std::move(init.note_vocab)), stats(std::move(init.stats)),
      step(init.step),
      model(cfg, phoneme_vocab.size(), note_vocab.size(), 0) {
  ckpt::load(init.path, "svs_model", model.store().params(),
             [](std::istream& in) {
               uint64_t len = 0;
               in.read(reinterpret_cast<char*>(&len), 8);
               in.seekg(static_cast<std::streamoff>(len), std::ios::cur);
             });
}

Waveform LoadedModel::synthesize(const score::ScoreTokens& tokens, uint64_t seed,
                                 const std::vector<int64_t>* gt_durations) {
  ad::NoGradGuard ng;
  Rng rng(seed);
  nn::RunState rs{false, &rng};

  std::vector<int64_t> durations;
  if (gt_durations) {
    durations = *gt_durations;
  } else {
    ad::Var enc = model.prior().encode_score(tokens.phoneme_ids, tokens.note_ids,
                                             tokens.slur_ids, -1, rs);
    durations = PriorEncoder::durations_from_log(
        model.prior().predict_duration(enc, rs).val());
  }
  const std::vector<char> vuv = note_vuv(tokens, durations);
  PriorForward pf =
      model.prior().forward(tokens, durations, vuv, stats, rng, rs, false);
  pf.prior.sample(rng, 0.0);

  const int64_t t_frames = pf.prior.frames();
  std::vector<double> f0_hz(static_cast<size_t>(t_frames), 0.0);
  for (int64_t t = 0; t < t_frames; ++t)
    if (vuv[static_cast<size_t>(t)]) {
      const double lf0 =
          pf.lf0_pred.val().at(t, 0) * stats.lf0_std + stats.lf0_mean;
      f0_hz[static_cast<size_t>(t)] = std::clamp(std::exp(lf0), 30.0, 4000.0);
    }
  ad::Var wave = model.generator().forward(pf.prior.z, f0_hz, rng, false);
  Waveform out;
  out.sample_rate = cfg.dsp.sample_rate;
  out.samples = wave.val().data;
  return out;
}

}  // namespace sfs::train
