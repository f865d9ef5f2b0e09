// src/demo.cpp
#include "sfs/demo.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace sfs::demo {

namespace {

double midi_to_hz(int midi) {
  return 440.0 * std::exp2((static_cast<double>(midi) - 69.0) / 12.0);
}

}  // namespace

std::vector<DemoUtterance> make_corpus(int64_t n_utts, uint64_t seed,
                                       int sample_rate, int64_t min_syllables,
                                       int64_t max_syllables, double min_dur,
                                       double max_dur) {
  Rng rng(seed);
  const std::vector<std::string> vowels = {"a", "e", "i", "o", "u"};
  const std::vector<std::string> note_pool = {"C4", "D4", "E4", "G4",
                                              "A4", "C5", "D5"};

  std::vector<DemoUtterance> corpus;
  for (int64_t u = 0; u < n_utts; ++u) {
    DemoUtterance d;
    char id[32];
    std::snprintf(id, sizeof(id), "demo%04lld", static_cast<long long>(u));
    d.entry.utt_id = id;
    d.entry.text = "la";

    const int64_t n_syll = rng.randint(min_syllables, max_syllables);
    for (int64_t s = 0; s < n_syll; ++s) {
      const bool rest = s > 0 && rng.uniform() < 0.25;
      const double dur = rest ? rng.uniform(0.6 * min_dur, 0.6 * max_dur)
                              : rng.uniform(min_dur, max_dur);
      d.entry.phonemes.push_back(
          rest ? "s" : vowels[static_cast<size_t>(rng.randint(0, 4))]);
      d.entry.notes.push_back(
          rest ? "rest" : note_pool[static_cast<size_t>(rng.randint(
                     0, static_cast<int64_t>(note_pool.size()) - 1))]);
      d.entry.phoneme_durations.push_back(dur);
      d.entry.note_durations.push_back(dur);
      d.entry.slur_flags.push_back(!rest && rng.uniform() < 0.15 ? 1 : 0);
    }

    // render: phase-continuous harmonic oscillator with vibrato, noise rests
    d.wave.sample_rate = sample_rate;
    double phase = 0.0;
    double t_global = 0.0;
    const double vibrato_hz = 5.0, vibrato_cents = 20.0;
    for (size_t s = 0; s < d.entry.phonemes.size(); ++s) {
      const int midi = score::note_to_midi(d.entry.notes[s]);
      const int64_t n = static_cast<int64_t>(d.entry.phoneme_durations[s] * sample_rate);
      for (int64_t i = 0; i < n; ++i) {
        const double env_in = std::min(1.0, static_cast<double>(i) / (0.012 * sample_rate));
        const double env_out =
            std::min(1.0, static_cast<double>(n - 1 - i) / (0.012 * sample_rate));
        const double env = std::min(env_in, env_out);
        double v;
        if (midi == 0) {
          v = 0.01 * rng.normal();
        } else {
          const double cents = vibrato_cents * std::sin(2.0 * kPi * vibrato_hz * t_global);
          const double f = midi_to_hz(midi) * std::exp2(cents / 1200.0);
          phase += 2.0 * kPi * f / sample_rate;
          v = 0.0;
          for (int h = 1; h <= 8; ++h) {
            if (f * h >= sample_rate / 2.0) break;
            v += std::sin(phase * h) * 0.45 / std::pow(static_cast<double>(h), 1.3);
          }
          v += 0.004 * rng.normal();
        }
        d.wave.samples.push_back(0.7 * env * v);
        t_global += 1.0 / sample_rate;
      }
    }
    corpus.push_back(std::move(d));
  }
  return corpus;
}

void write_corpus(const std::string& out_dir,
                  const std::vector<DemoUtterance>& corpus) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "wav");
  std::ofstream tr((fs::path(out_dir) / "transcription.txt").string());
  if (!tr) throw IOError("cannot write transcription");
  for (const DemoUtterance& d : corpus) {
    write_wav((fs::path(out_dir) / "wav" / (d.entry.utt_id + ".wav")).string(),
              d.wave);
    tr << score::format_entry(d.entry) << '\n';
  }
}

}  // namespace sfs::demo
