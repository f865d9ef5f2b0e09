// src/config.cpp
#include "sfs/config.h"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sfs {

using nlohmann::json;

namespace {

json to_json_obj(const Config& c) {
  json j;
  j["dsp"] = {{"sample_rate", c.dsp.sample_rate},
              {"fft_size", c.dsp.stft.fft_size},
              {"hop", c.dsp.stft.hop},
              {"win_length", c.dsp.stft.win_length},
              {"n_mels", c.dsp.n_mels},
              {"mel_fmin", c.dsp.mel_fmin},
              {"mel_fmax", c.dsp.mel_fmax},
              {"mel_floor", c.dsp.mel_floor},
              {"n_mcep", c.dsp.n_mcep},
              {"alpha_warp", c.dsp.alpha_warp},
              {"f0_min", c.dsp.f0_min},
              {"f0_max", c.dsp.f0_max}};
  j["prior"] = {{"hidden", c.prior.hidden},
                {"filter", c.prior.filter},
                {"heads", c.prior.heads},
                {"encoder_blocks", c.prior.encoder_blocks},
                {"acoustic_blocks", c.prior.acoustic_blocks},
                {"am_blocks", c.prior.am_blocks},
                {"ffn_kernel", c.prior.ffn_kernel},
                {"duration_kernel", c.prior.duration_kernel},
                {"dropout", c.prior.dropout},
                {"midi_vocab", c.prior.midi_vocab}};
  j["posterior"] = {{"layers", c.posterior.layers},
                    {"hidden", c.posterior.hidden},
                    {"kernel", c.posterior.kernel}};
  j["generator"] = {{"upsample_rates", c.generator.upsample_rates},
                    {"upsample_kernels", c.generator.upsample_kernels},
                    {"hidden", c.generator.hidden},
                    {"resblock_kernels", c.generator.resblock_kernels},
                    {"resblock_dilations", c.generator.resblock_dilations}};
  j["discriminator"] = {{"periods", c.discriminator.periods},
                        {"resolutions", c.discriminator.resolutions},
                        {"channel_scale", c.discriminator.channel_scale}};
  j["source"] = {{"alpha", c.source.alpha},
                 {"sigma", c.source.sigma},
                 {"harmonics", c.source.n_harmonics}};
  j["pitch"] = {{"sample_rate", c.pitch.sample_rate},
                {"window", c.pitch.window},
                {"hop", c.pitch.hop},
                {"n_bins", c.pitch.n_bins},
                {"channel_scale", c.pitch.channel_scale}};
  j["loss"] = {{"lambda1", c.loss.lambda1},
               {"lambda2", c.loss.lambda2},
               {"lambda_mel", c.loss.lambda_mel},
               {"lambda_fm", c.loss.lambda_fm},
               {"lambda_f0", c.loss.lambda_f0},
               {"lambda_mcep", c.loss.lambda_mcep}};
  j["train"] = {{"batch_size", c.train.batch_size},
                {"total_steps", c.train.total_steps},
                {"lr", c.train.lr},
                {"lr_decay", c.train.lr_decay},
                {"beta1", c.train.beta1},
                {"beta2", c.train.beta2},
                {"weight_decay", c.train.weight_decay},
                {"grad_clip", c.train.grad_clip},
                {"segment_samples", c.train.segment_samples},
                {"seed", c.train.seed},
                {"log_every", c.train.log_every},
                {"checkpoint_every", c.train.checkpoint_every},
                {"no_diff_recon", c.train.no_diff_recon},
                {"no_am_source", c.train.no_am_source}};
  return j;
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void from_json_obj(const json& j, Config& c) {
  if (j.contains("dsp")) {
    const json& d = j["dsp"];
    get_if(d, "sample_rate", c.dsp.sample_rate);
    get_if(d, "fft_size", c.dsp.stft.fft_size);
    get_if(d, "hop", c.dsp.stft.hop);
    get_if(d, "win_length", c.dsp.stft.win_length);
    get_if(d, "n_mels", c.dsp.n_mels);
    get_if(d, "mel_fmin", c.dsp.mel_fmin);
    get_if(d, "mel_fmax", c.dsp.mel_fmax);
    get_if(d, "mel_floor", c.dsp.mel_floor);
    get_if(d, "n_mcep", c.dsp.n_mcep);
    get_if(d, "alpha_warp", c.dsp.alpha_warp);
    get_if(d, "f0_min", c.dsp.f0_min);
    get_if(d, "f0_max", c.dsp.f0_max);
  }
  if (j.contains("prior")) {
    const json& d = j["prior"];
    get_if(d, "hidden", c.prior.hidden);
    get_if(d, "filter", c.prior.filter);
    get_if(d, "heads", c.prior.heads);
    get_if(d, "encoder_blocks", c.prior.encoder_blocks);
    get_if(d, "acoustic_blocks", c.prior.acoustic_blocks);
    get_if(d, "am_blocks", c.prior.am_blocks);
    get_if(d, "ffn_kernel", c.prior.ffn_kernel);
    get_if(d, "duration_kernel", c.prior.duration_kernel);
    get_if(d, "dropout", c.prior.dropout);
    get_if(d, "midi_vocab", c.prior.midi_vocab);
  }
  if (j.contains("posterior")) {
    const json& d = j["posterior"];
    get_if(d, "layers", c.posterior.layers);
    get_if(d, "hidden", c.posterior.hidden);
    get_if(d, "kernel", c.posterior.kernel);
  }
  if (j.contains("generator")) {
    const json& d = j["generator"];
    get_if(d, "upsample_rates", c.generator.upsample_rates);
    get_if(d, "upsample_kernels", c.generator.upsample_kernels);
    get_if(d, "hidden", c.generator.hidden);
    get_if(d, "resblock_kernels", c.generator.resblock_kernels);
    get_if(d, "resblock_dilations", c.generator.resblock_dilations);
  }
  if (j.contains("discriminator")) {
    const json& d = j["discriminator"];
    get_if(d, "periods", c.discriminator.periods);
    get_if(d, "resolutions", c.discriminator.resolutions);
    get_if(d, "channel_scale", c.discriminator.channel_scale);
  }
  if (j.contains("source")) {
    const json& d = j["source"];
    get_if(d, "alpha", c.source.alpha);
    get_if(d, "sigma", c.source.sigma);
    get_if(d, "harmonics", c.source.n_harmonics);
  }
  if (j.contains("pitch")) {
    const json& d = j["pitch"];
    get_if(d, "sample_rate", c.pitch.sample_rate);
    get_if(d, "window", c.pitch.window);
    get_if(d, "hop", c.pitch.hop);
    get_if(d, "n_bins", c.pitch.n_bins);
    get_if(d, "channel_scale", c.pitch.channel_scale);
  }
  if (j.contains("loss")) {
    const json& d = j["loss"];
    get_if(d, "lambda1", c.loss.lambda1);
    get_if(d, "lambda2", c.loss.lambda2);
    get_if(d, "lambda_mel", c.loss.lambda_mel);
    get_if(d, "lambda_fm", c.loss.lambda_fm);
    get_if(d, "lambda_f0", c.loss.lambda_f0);
    get_if(d, "lambda_mcep", c.loss.lambda_mcep);
  }
  if (j.contains("train")) {
    const json& d = j["train"];
    get_if(d, "batch_size", c.train.batch_size);
    get_if(d, "total_steps", c.train.total_steps);
    get_if(d, "lr", c.train.lr);
    get_if(d, "lr_decay", c.train.lr_decay);
    get_if(d, "beta1", c.train.beta1);
    get_if(d, "beta2", c.train.beta2);
    get_if(d, "weight_decay", c.train.weight_decay);
    get_if(d, "grad_clip", c.train.grad_clip);
    get_if(d, "segment_samples", c.train.segment_samples);
    get_if(d, "seed", c.train.seed);
    get_if(d, "log_every", c.train.log_every);
    get_if(d, "checkpoint_every", c.train.checkpoint_every);
    get_if(d, "no_diff_recon", c.train.no_diff_recon);
    get_if(d, "no_am_source", c.train.no_am_source);
  }
}

}  // namespace

void Config::validate() const {
  require(generator.upsample_rates.size() == generator.upsample_kernels.size(),
          "generator rate/kernel lists match");
  require(generator.total_upsample() == dsp.stft.hop,
          "generator upsampling must equal the frame hop");
  require(train.batch_size >= 1, "batch_size >= 1");
  require(train.beta1 > 0.0 && train.beta1 < 1.0 && train.beta2 > 0.0 &&
              train.beta2 < 1.0,
          "adam betas in (0,1)");
  require(prior.hidden > 0 && prior.filter > 0, "positive prior dims");
  require(loss.lambda1 > 0 && loss.lambda2 > 0 && loss.lambda_mel > 0 &&
              loss.lambda_fm > 0 && loss.lambda_f0 > 0 && loss.lambda_mcep > 0,
          "loss weights positive");
  if (!train.no_diff_recon) {
    // the F0 reconstruction loss needs at least one pitch analysis window
    // after resampling the training segment
    const int64_t min_segment = static_cast<int64_t>(
        std::ceil(static_cast<double>(pitch.window) * dsp.sample_rate /
                  pitch.sample_rate));
    require(train.segment_samples >= min_segment,
            "segment_samples too short for the pitch window (disable "
            "diff-recon or enlarge the segment)");
  }
  source.validate();
}

std::string Config::to_json() const { return to_json_obj(*this).dump(2); }

Config Config::from_json(const std::string& text) {
  Config c;
  from_json_obj(json::parse(text), c);
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void Config::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IOError("cannot write config " + path);
  out << to_json() << '\n';
}

Config desk_config() {
  Config c;
  c.prior.hidden = 64;
  c.prior.filter = 256;
  c.prior.heads = 2;
  c.prior.encoder_blocks = 2;
  c.prior.acoustic_blocks = 2;
  c.prior.am_blocks = 2;
  c.posterior.layers = 4;
  c.posterior.hidden = 64;
  c.generator.hidden = 64;
  c.generator.resblock_kernels = {3, 7};
  c.generator.resblock_dilations = {1, 3};
  c.discriminator.channel_scale = 0.25;
  c.loss.lambda_f0 = 0.3;   // raw Hz^2 MSE; strong enough to anchor pitch
  c.loss.lambda_mcep = 1.0;
  c.train.batch_size = 1;
  c.train.total_steps = 2000;
  c.train.segment_samples = 4096;
  c.train.lr = 2e-4;
  c.train.lr_decay = 0.9995;
  c.train.weight_decay = 0.0;
  c.train.checkpoint_every = 1000;
  return c;
}

void Config::apply_override(const std::string& key, const std::string& value) {
  json j = to_json_obj(*this);
  json* node = &j;
  std::string rest = key;
  size_t dot;
  while ((dot = rest.find('.')) != std::string::npos) {
    const std::string head = rest.substr(0, dot);
    if (!node->contains(head)) throw Error("unknown config key: " + key);
    node = &(*node)[head];
    rest = rest.substr(dot + 1);
  }
  if (!node->contains(rest)) throw Error("unknown config key: " + key);
  json& leaf = (*node)[rest];
  if (leaf.is_boolean())
    leaf = (value == "true" || value == "1");
  else if (leaf.is_number_integer())
    leaf = std::stoll(value);
  else if (leaf.is_number_unsigned())
    leaf = static_cast<uint64_t>(std::stoull(value));
  else if (leaf.is_number_float())
    leaf = std::stod(value);
  else if (leaf.is_string())
    leaf = value;
  else
    throw Error("config key " + key + " is not a scalar");
  from_json_obj(j, *this);
}

}  // namespace sfs
