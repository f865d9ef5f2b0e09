// src/dataset.cpp
#include "sfs/dataset.h"

#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace sfs::data {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_i64_vec(std::ostream& out, const std::vector<int64_t>& v) {
  const uint64_t n = v.size();
  out.write(reinterpret_cast<const char*>(&n), 8);
  out.write(reinterpret_cast<const char*>(v.data()), 8 * n);
}

std::vector<int64_t> read_i64_vec(std::istream& in) {
  uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), 8);
  if (!in || n > (1ull << 28)) throw IOError("bad vector length in record");
  std::vector<int64_t> v(n);
  in.read(reinterpret_cast<char*>(v.data()), 8 * n);
  return v;
}

void write_f64_vec(std::ostream& out, const std::vector<double>& v) {
  const uint64_t n = v.size();
  out.write(reinterpret_cast<const char*>(&n), 8);
  out.write(reinterpret_cast<const char*>(v.data()), 8 * n);
}

std::vector<double> read_f64_vec(std::istream& in) {
  uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), 8);
  if (!in || n > (1ull << 28)) throw IOError("bad vector length in record");
  std::vector<double> v(n);
  in.read(reinterpret_cast<char*>(v.data()), 8 * n);
  return v;
}

}  // namespace

void save_utterance(const std::string& path, const score::ScoreTokens& tokens,
                    const dsp::AcousticFeatures& f,
                    const std::vector<double>& f0_hz) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot write " + path);
  out.write("SFFE", 4);
  const uint32_t version = 1;
  out.write(reinterpret_cast<const char*>(&version), 4);
  const uint32_t id_len = static_cast<uint32_t>(tokens.utt_id.size());
  out.write(reinterpret_cast<const char*>(&id_len), 4);
  out.write(tokens.utt_id.data(), id_len);

  write_i64_vec(out, tokens.phoneme_ids);
  write_i64_vec(out, tokens.note_ids);
  write_i64_vec(out, tokens.midi_ids);
  write_i64_vec(out, tokens.duration_frames);
  write_i64_vec(out, tokens.note_duration_frames);
  write_i64_vec(out, tokens.slur_ids);

  const int64_t t_frames = f.frames(), dims = f.mcep.cols();
  out.write(reinterpret_cast<const char*>(&t_frames), 8);
  out.write(reinterpret_cast<const char*>(&dims), 8);
  out.write(reinterpret_cast<const char*>(&f.frame_hop), 8);
  out.write(reinterpret_cast<const char*>(&f.frame_length), 8);
  out.write(reinterpret_cast<const char*>(f.mcep.ptr()), 8 * t_frames * dims);
  write_f64_vec(out, f.log_f0);
  write_f64_vec(out, f0_hz);
  std::vector<int64_t> vuv(f.vuv.begin(), f.vuv.end());
  write_i64_vec(out, vuv);
  if (!out) throw IOError(path + ": write failed");
}

void load_utterance(const std::string& path, score::ScoreTokens& tokens,
                    dsp::AcousticFeatures& f, std::vector<double>& f0_hz) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot read " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "SFFE") throw IOError(path + ": bad magic");
  uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  if (version != 1)
    throw VersionMismatch(path + ": record version " + std::to_string(version) +
                          ", expected 1");
  uint32_t id_len = 0;
  in.read(reinterpret_cast<char*>(&id_len), 4);
  tokens.utt_id.resize(id_len);
  in.read(tokens.utt_id.data(), id_len);

  tokens.phoneme_ids = read_i64_vec(in);
  tokens.note_ids = read_i64_vec(in);
  tokens.midi_ids = read_i64_vec(in);
  tokens.duration_frames = read_i64_vec(in);
  tokens.note_duration_frames = read_i64_vec(in);
  tokens.slur_ids = read_i64_vec(in);

  int64_t t_frames = 0, dims = 0;
  in.read(reinterpret_cast<char*>(&t_frames), 8);
  in.read(reinterpret_cast<char*>(&dims), 8);
  in.read(reinterpret_cast<char*>(&f.frame_hop), 8);
  in.read(reinterpret_cast<char*>(&f.frame_length), 8);
  f.mcep = Tensor({t_frames, dims});
  in.read(reinterpret_cast<char*>(f.mcep.ptr()), 8 * t_frames * dims);
  f.log_f0 = read_f64_vec(in);
  f0_hz = read_f64_vec(in);
  const auto vuv = read_i64_vec(in);
  f.vuv.assign(vuv.begin(), vuv.end());
  if (!in) throw IOError(path + ": truncated record");
}

int64_t prepare_dataset(const std::string& transcription_path,
                        const std::string& wav_dir, const std::string& out_dir,
                        const dsp::DspConfig& cfg) {
  std::ifstream in(transcription_path);
  if (!in) throw IOError("cannot read " + transcription_path);
  std::vector<score::ScoreEntry> entries;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      entries.push_back(score::parse_transcription(line));
    } catch (const Error& e) {
      throw MalformedLine(transcription_path + ":" + std::to_string(line_no) +
                          ": " + e.what());
    }
  }
  if (entries.empty()) throw EmptyCorpus(transcription_path + " has no utterances");

  auto [phoneme_vocab, note_vocab] = score::build_vocab(entries);

  fs::create_directories(fs::path(out_dir) / "feats");

  // extract features and fit normalization over the raw corpus
  std::vector<dsp::AcousticFeatures> raw_feats;
  std::vector<std::vector<double>> f0_tracks;
  std::vector<std::string> wav_paths;
  for (const score::ScoreEntry& e : entries) {
    const std::string wav_path = (fs::path(wav_dir) / (e.utt_id + ".wav")).string();
    Waveform wave = read_wav(wav_path, cfg.sample_rate);
    dsp::AcousticFeatures f = dsp::extract_features(wave, cfg);
    std::vector<double> f0_hz(f.log_f0.size(), 0.0);
    for (size_t t = 0; t < f.log_f0.size(); ++t)
      if (f.vuv[t]) f0_hz[t] = std::exp(f.log_f0[t]);
    raw_feats.push_back(std::move(f));
    f0_tracks.push_back(std::move(f0_hz));
    wav_paths.push_back(wav_path);
  }
  dsp::NormStats stats = dsp::fit_norm_stats(raw_feats);

  json manifest;
  manifest["version"] = 1;
  manifest["dsp"] = {{"sample_rate", cfg.sample_rate},
                     {"fft_size", cfg.stft.fft_size},
                     {"hop", cfg.stft.hop},
                     {"win_length", cfg.stft.win_length},
                     {"n_mels", cfg.n_mels},
                     {"n_mcep", cfg.n_mcep},
                     {"alpha_warp", cfg.alpha_warp},
                     {"f0_min", cfg.f0_min},
                     {"f0_max", cfg.f0_max}};
  manifest["utterances"] = json::array();

  for (size_t i = 0; i < entries.size(); ++i) {
    const score::ScoreEntry& e = entries[i];
    score::ScoreTokens tokens =
        score::encode_entry(e, phoneme_vocab, note_vocab, cfg.stft.hop,
                            cfg.sample_rate, raw_feats[i].frames());
    const std::string rec = (fs::path(out_dir) / "feats" / (e.utt_id + ".sff")).string();
    save_utterance(rec, tokens, raw_feats[i], f0_tracks[i]);
    manifest["utterances"].push_back(
        {{"utt_id", e.utt_id}, {"record", rec}, {"wav", wav_paths[i]}});
  }

  phoneme_vocab.save((fs::path(out_dir) / "phoneme_vocab.txt").string());
  note_vocab.save((fs::path(out_dir) / "note_vocab.txt").string());
  stats.save((fs::path(out_dir) / "norm_stats.bin").string());
  std::ofstream mf((fs::path(out_dir) / "manifest.json").string());
  if (!mf) throw IOError("cannot write manifest");
  mf << manifest.dump(2) << '\n';
  return static_cast<int64_t>(entries.size());
}

Dataset load_dataset(const std::string& dir) {
  std::ifstream mf((fs::path(dir) / "manifest.json").string());
  if (!mf) throw IOError("cannot read " + dir + "/manifest.json");
  json manifest = json::parse(mf);

  Dataset ds;
  ds.phoneme_vocab = score::Vocab::load((fs::path(dir) / "phoneme_vocab.txt").string());
  ds.note_vocab = score::Vocab::load((fs::path(dir) / "note_vocab.txt").string());
  ds.stats = dsp::NormStats::load((fs::path(dir) / "norm_stats.bin").string());

  const json& d = manifest.at("dsp");
  ds.dsp_cfg.sample_rate = d.at("sample_rate").get<int>();
  ds.dsp_cfg.stft.fft_size = d.at("fft_size").get<int64_t>();
  ds.dsp_cfg.stft.hop = d.at("hop").get<int64_t>();
  ds.dsp_cfg.stft.win_length = d.at("win_length").get<int64_t>();
  ds.dsp_cfg.n_mels = d.at("n_mels").get<int64_t>();
  ds.dsp_cfg.n_mcep = d.at("n_mcep").get<int64_t>();
  ds.dsp_cfg.alpha_warp = d.at("alpha_warp").get<double>();
  ds.dsp_cfg.f0_min = d.at("f0_min").get<double>();
  ds.dsp_cfg.f0_max = d.at("f0_max").get<double>();

  for (const json& u : manifest.at("utterances")) {
    Utterance utt;
    load_utterance(u.at("record").get<std::string>(), utt.tokens, utt.features,
                   utt.f0_hz);
    utt.wav_path = u.at("wav").get<std::string>();
    utt.wave = read_wav(utt.wav_path, ds.dsp_cfg.sample_rate);
    utt.wave.samples.resize(
        static_cast<size_t>(utt.features.frames() * ds.dsp_cfg.stft.hop));
    dsp::apply_norm(utt.features, ds.stats);
    ds.utts.push_back(std::move(utt));
  }
  if (ds.utts.empty()) throw EmptyCorpus(dir + " contains no utterances");
  return ds;
}

const Utterance& Dataset::by_id(const std::string& utt_id) const {
  for (const Utterance& u : utts)
    if (u.tokens.utt_id == utt_id) return u;
  throw Error("utterance not found: " + utt_id);
}

}  // namespace sfs::data
