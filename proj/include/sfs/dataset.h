// sfs/dataset.h -- corpus preparation and the on-disk dataset layout.
//
// prepare_dataset writes, under the output directory:
//   manifest.json             index of utterances + dsp settings
//   phoneme_vocab.txt / note_vocab.txt   "symbol<TAB>id" tables
//   norm_stats.bin            corpus mean/std (SFNS)
//   feats/<utt_id>.sff        per-utterance record (tokens + raw features)
// Waveforms stay in place; the manifest records their paths.
#pragma once

#include <string>
#include <vector>

#include "sfs/dsp.h"
#include "sfs/score.h"
#include "sfs/wav.h"

namespace sfs::data {

struct Utterance {
  score::ScoreTokens tokens;
  dsp::AcousticFeatures features;  // normalized after load_dataset
  std::vector<double> f0_hz;       // raw Hz track for excitation
  std::string wav_path;
  Waveform wave;                   // trimmed to frames * hop samples
};

struct Dataset {
  std::vector<Utterance> utts;
  score::Vocab phoneme_vocab, note_vocab;
  dsp::NormStats stats;
  dsp::DspConfig dsp_cfg;

  const Utterance& by_id(const std::string& utt_id) const;
};

// Parses the transcription, extracts features from <wav_dir>/<utt_id>.wav,
// fits normalization statistics and writes the dataset directory.
// Returns the number of utterances written.
int64_t prepare_dataset(const std::string& transcription_path,
                        const std::string& wav_dir, const std::string& out_dir,
                        const dsp::DspConfig& cfg);

// Loads a prepared dataset; features come back normalized, waves trimmed.
Dataset load_dataset(const std::string& dir);

// Per-utterance record io (exposed for tests).
void save_utterance(const std::string& path, const score::ScoreTokens& tokens,
                    const dsp::AcousticFeatures& raw_features,
                    const std::vector<double>& f0_hz);
void load_utterance(const std::string& path, score::ScoreTokens& tokens,
                    dsp::AcousticFeatures& raw_features,
                    std::vector<double>& f0_hz);

}  // namespace sfs::data
