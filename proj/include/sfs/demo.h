// sfs/demo.h -- synthetic mini-corpus for development and tests: score
// entries plus matching rendered waveforms (harmonic voice-like tones on the
// scored notes, breath noise on rests).
#pragma once

#include <string>
#include <vector>

#include "sfs/score.h"
#include "sfs/wav.h"

namespace sfs::demo {

struct DemoUtterance {
  score::ScoreEntry entry;
  Waveform wave;
};

// Deterministic given the seed. Each utterance sings a few syllables over a
// small note set with vibrato, separated occasionally by unvoiced rests.
// Syllable count and per-syllable duration bounds are tunable so tests can
// make very short utterances.
std::vector<DemoUtterance> make_corpus(int64_t n_utts, uint64_t seed,
                                       int sample_rate = 44100,
                                       int64_t min_syllables = 3,
                                       int64_t max_syllables = 6,
                                       double min_dur = 0.25,
                                       double max_dur = 0.55);

// Writes <out_dir>/wav/<utt_id>.wav and <out_dir>/transcription.txt.
void write_corpus(const std::string& out_dir,
                  const std::vector<DemoUtterance>& corpus);

}  // namespace sfs::demo
