// tools/sfsing.cpp -- command-line entry point.
//
// Subcommands: demo-data, prepare-data, pretrain-pitch, train, synthesize,
// evaluate, plot. Exit codes: 0 ok, 1 user/data error, 2 internal error.
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "sfs/dataset.h"
#include "sfs/demo.h"
#include "sfs/metrics.h"
#include "sfs/pitch.h"
#include "sfs/plot.h"
#include "sfs/train.h"

namespace fs = std::filesystem;
using namespace sfs;

namespace {

Config load_config(const std::string& path) {
  return path.empty() ? Config{} : Config::load(path);
}

void apply_extra_overrides(Config& cfg, const std::vector<std::string>& extras) {
  for (const std::string& raw : extras) {
    if (raw.rfind("--", 0) != 0)
      throw Error("unrecognized argument '" + raw + "' (overrides look like --train.lr=1e-4)");
    const std::string kv = raw.substr(2);
    const size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw Error("override '" + raw + "' needs the form --key=value");
    cfg.apply_override(kv.substr(0, eq), kv.substr(eq + 1));
  }
}

std::vector<score::ScoreTokens> encode_score_file(const std::string& path,
                                                  const score::Vocab& pv,
                                                  const score::Vocab& nv,
                                                  const dsp::DspConfig& dsp_cfg) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot read " + path);
  std::vector<score::ScoreTokens> out;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(score::encode_entry(score::parse_transcription(line), pv, nv,
                                        dsp_cfg.stft.hop, dsp_cfg.sample_rate));
    } catch (const Error& e) {
      throw Error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (out.empty()) throw EmptyCorpus(path + " has no score lines");
  return out;
}

int run_evaluate(const std::string& ref_dir, const std::string& syn_dir,
                 const std::string& out_csv) {
  dsp::DspConfig cfg;
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(ref_dir))
    if (e.path().extension() == ".wav") names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  if (names.empty()) throw EmptyCorpus(ref_dir + " has no .wav files");

  std::string csv = "utt_id,f0_rmse_hz,mel_rmse,f0_corr,vuv_pct\n";
  double sums[4] = {0, 0, 0, 0};
  int64_t count = 0;
  for (const std::string& name : names) {
    const std::string syn_path = (fs::path(syn_dir) / name).string();
    if (!fs::exists(syn_path)) throw IOError("missing synthesized file " + syn_path);
    Waveform ref = read_wav((fs::path(ref_dir) / name).string(), cfg.sample_rate);
    Waveform syn = read_wav(syn_path, cfg.sample_rate);

    auto ref_f0 = dsp::extract_f0_reference(ref, cfg.f0_min, cfg.f0_max, cfg.stft.hop);
    auto syn_f0 = dsp::extract_f0_reference(syn, cfg.f0_min, cfg.f0_max, cfg.stft.hop);
    Tensor ref_mel = dsp::mel_spectrogram(ref, cfg);
    Tensor syn_mel = dsp::mel_spectrogram(syn, cfg);

    const int64_t frames = std::min<int64_t>(
        {static_cast<int64_t>(ref_f0.f0.size()),
         static_cast<int64_t>(syn_f0.f0.size()), ref_mel.rows(), syn_mel.rows()});
    auto cut = [frames](auto v) {
      v.resize(static_cast<size_t>(frames));
      return v;
    };
    auto cut_mel = [frames](const Tensor& m) {
      Tensor out({frames, m.cols()});
      std::copy(m.data.begin(), m.data.begin() + frames * m.cols(), out.data.begin());
      return out;
    };
    const auto rf0 = cut(ref_f0.f0), sf0 = cut(syn_f0.f0);
    const auto rv = cut(ref_f0.vuv), sv = cut(syn_f0.vuv);

    const double m_rmse = metrics::f0_rmse(rf0, sf0, rv, sv);
    const double m_mel = metrics::mel_rmse(cut_mel(ref_mel), cut_mel(syn_mel));
    const double m_corr = metrics::f0_corr(rf0, sf0, rv, sv);
    const double m_vuv = metrics::vuv_error_percent(rv, sv);
    char row[256];
    std::snprintf(row, sizeof(row), "%s,%.4f,%.4f,%.4f,%.2f\n",
                  fs::path(name).stem().string().c_str(), m_rmse, m_mel, m_corr, m_vuv);
    csv += row;
    sums[0] += m_rmse;
    sums[1] += m_mel;
    sums[2] += m_corr;
    sums[3] += m_vuv;
    ++count;
  }
  char mean_row[256];
  std::snprintf(mean_row, sizeof(mean_row), "mean,%.4f,%.4f,%.4f,%.2f\n",
                sums[0] / count, sums[1] / count, sums[2] / count, sums[3] / count);
  csv += mean_row;
  std::cout << csv;
  if (!out_csv.empty()) {
    std::ofstream out(out_csv);
    if (!out) throw IOError("cannot write " + out_csv);
    out << csv;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sfsing: source-filter singing voice synthesis"};
  app.require_subcommand(1);

  // demo-data
  auto* demo_cmd = app.add_subcommand("demo-data", "generate a synthetic mini corpus");
  std::string demo_out = "demo_corpus";
  int64_t demo_n = 8;
  uint64_t demo_seed = 17;
  demo_cmd->add_option("--out", demo_out, "output directory");
  demo_cmd->add_option("--utterances", demo_n, "number of utterances");
  demo_cmd->add_option("--seed", demo_seed, "random seed");

  // prepare-data
  auto* prep = app.add_subcommand("prepare-data", "extract features and tokens");
  std::string prep_tr, prep_wav, prep_out, prep_cfg;
  prep->add_option("--transcription", prep_tr, "transcription file")->required();
  prep->add_option("--wav-dir", prep_wav, "waveform directory")->required();
  prep->add_option("--out", prep_out, "dataset output directory")->required();
  prep->add_option("--config", prep_cfg, "config JSON");

  // pretrain-pitch
  auto* pp = app.add_subcommand("pretrain-pitch", "train the pitch estimator on synthetic tones");
  std::string pp_out = "pitch.bin", pp_cfg;
  int64_t pp_tones = 10000, pp_epochs = 4;
  double pp_lr = 2e-4;
  uint64_t pp_seed = 7;
  pp->add_option("--out", pp_out, "checkpoint path");
  pp->add_option("--tones", pp_tones, "training tones");
  pp->add_option("--epochs", pp_epochs, "epochs");
  pp->add_option("--lr", pp_lr, "learning rate");
  pp->add_option("--seed", pp_seed, "random seed");
  pp->add_option("--config", pp_cfg, "config JSON");

  // train
  auto* tr = app.add_subcommand("train", "train the synthesis model");
  tr->allow_extras();
  std::string tr_data, tr_cfg, tr_pitch, tr_out = "run";
  int64_t tr_steps = -1;
  bool tr_no_diff = false, tr_no_am = false;
  tr->add_option("--data", tr_data, "prepared dataset directory")->required();
  tr->add_option("--config", tr_cfg, "config JSON");
  tr->add_option("--pitch-ckpt", tr_pitch, "pretrained pitch checkpoint")->required();
  tr->add_option("--out", tr_out, "run output directory");
  tr->add_option("--steps", tr_steps, "steps to run (default: train.total_steps)");
  tr->add_flag("--no-diff-recon", tr_no_diff, "ablation: drop the differentiable F0/mcep losses");
  tr->add_flag("--no-am-source", tr_no_am, "ablation: no source excitation into the AM decoder");

  // synthesize
  auto* sy = app.add_subcommand("synthesize", "render score lines to WAV");
  std::string sy_score, sy_ckpt, sy_out = "synth";
  uint64_t sy_seed = 0;
  sy->add_option("--score", sy_score, "score file (transcription format)")->required();
  sy->add_option("--ckpt", sy_ckpt, "model checkpoint")->required();
  sy->add_option("--out", sy_out, "output directory");
  sy->add_option("--seed", sy_seed, "sampling seed");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "objective metrics over wav pairs");
  std::string ev_ref, ev_syn, ev_out;
  ev->add_option("--ref-dir", ev_ref, "reference wav directory")->required();
  ev->add_option("--syn-dir", ev_syn, "synthesized wav directory")->required();
  ev->add_option("--out", ev_out, "also write the CSV here");

  // plot
  auto* pl = app.add_subcommand("plot", "spectrogram with pitch overlay");
  std::string pl_wav, pl_out = "plot.png", pl_f0;
  pl->add_option("--wav", pl_wav, "input waveform")->required();
  pl->add_option("--out", pl_out, "output PNG path");
  pl->add_option("--f0", pl_f0, "optional F0 CSV (frame,time_sec,f0_hz); default: extract");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 1 : 0;
  }

  try {
    if (*demo_cmd) {
      auto corpus = demo::make_corpus(demo_n, demo_seed);
      demo::write_corpus(demo_out, corpus);
      std::printf("wrote %lld utterances under %s\n",
                  static_cast<long long>(corpus.size()), demo_out.c_str());
    } else if (*prep) {
      Config cfg = load_config(prep_cfg);
      const int64_t n = data::prepare_dataset(prep_tr, prep_wav, prep_out, cfg.dsp);
      std::printf("prepared %lld utterances into %s\n", static_cast<long long>(n),
                  prep_out.c_str());
    } else if (*pp) {
      Config cfg = load_config(pp_cfg);
      pitch::PitchNet net(cfg.pitch, pp_seed);
      auto report = pitch::pretrain(net, pp_tones, pp_epochs, pp_lr, pp_seed,
                                    55.0, 1000.0, 32, true);
      net.save(pp_out);
      std::printf("pitch net saved to %s (loss %.4f, held-out within 50 cents: %.1f%%)\n",
                  pp_out.c_str(), report.final_loss, 100.0 * report.heldout_within_50c);
    } else if (*tr) {
      Config cfg = load_config(tr_cfg);
      apply_extra_overrides(cfg, tr->remaining());
      if (tr_no_diff) cfg.train.no_diff_recon = true;
      if (tr_no_am) cfg.train.no_am_source = true;
      cfg.validate();

      data::Dataset ds = data::load_dataset(tr_data);
      pitch::PitchNet net(cfg.pitch);
      net.load(tr_pitch);
      train::Trainer trainer(cfg, std::move(ds), std::move(net));
      const int64_t steps = tr_steps > 0 ? tr_steps : cfg.train.total_steps;
      fs::create_directories(tr_out);
      cfg.save((fs::path(tr_out) / "config.json").string());
      trainer.run(steps, tr_out, (fs::path(tr_out) / "losses.jsonl").string());
      std::printf("trained %lld steps; checkpoints in %s\n",
                  static_cast<long long>(steps), tr_out.c_str());
    } else if (*sy) {
      train::LoadedModel lm(sy_ckpt);
      auto tokens = encode_score_file(sy_score, lm.phoneme_vocab, lm.note_vocab,
                                      lm.cfg.dsp);
      fs::create_directories(sy_out);
      for (const auto& t : tokens) {
        Waveform wave = lm.synthesize(t, sy_seed);
        const std::string path = (fs::path(sy_out) / (t.utt_id + ".wav")).string();
        write_wav(path, wave);
        std::printf("%s: %.2f s\n", path.c_str(), wave.duration());
      }
    } else if (*ev) {
      return run_evaluate(ev_ref, ev_syn, ev_out);
    } else if (*pl) {
      dsp::DspConfig cfg;
      Waveform wave = read_wav(pl_wav, cfg.sample_rate);
      std::vector<double> f0;
      if (pl_f0.empty()) {
        auto track = dsp::extract_f0_reference(wave, cfg.f0_min, cfg.f0_max,
                                               cfg.stft.hop);
        f0 = track.f0;
      } else {
        std::ifstream in(pl_f0);
        if (!in) throw IOError("cannot read " + pl_f0);
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
          const size_t c2 = line.rfind(',');
          if (c2 != std::string::npos) f0.push_back(std::stod(line.substr(c2 + 1)));
        }
      }
      plot::spectrogram_pitch(wave, f0, cfg, pl_out);
      std::printf("wrote %s and %s.csv\n", pl_out.c_str(), pl_out.c_str());
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 2;
  }
  return 0;
}
