// sfs/score.h -- transcription parsing, vocabularies, score token encoding.
//
// Transcription lines follow the public Opencpop layout:
//   utt_id|text|phonemes|notes|note_durations|phoneme_durations|slurs
// with "|" separating fields and single spaces separating items in a field.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "sfs/common.h"

namespace sfs::score {

struct ScoreEntry {
  std::string utt_id;
  std::string text;
  std::vector<std::string> phonemes;
  std::vector<std::string> notes;        // note names or "rest"
  std::vector<double> note_durations;    // seconds per note
  std::vector<double> phoneme_durations; // seconds per phoneme
  std::vector<int> slur_flags;           // 0/1 per phoneme

  double total_duration() const {
    double s = 0.0;
    for (double d : phoneme_durations) s += d;
    return s;
  }
};

struct ScoreTokens {
  std::string utt_id;
  std::vector<int64_t> phoneme_ids;
  std::vector<int64_t> note_ids;        // aligned to phonemes
  std::vector<int64_t> midi_ids;        // MIDI number per phoneme, 0 for rest
  std::vector<int64_t> duration_frames; // frames per phoneme, sum-preserving
  std::vector<int64_t> note_duration_frames;
  std::vector<int64_t> slur_ids;

  int64_t total_frames() const {
    int64_t s = 0;
    for (int64_t f : duration_frames) s += f;
    return s;
  }
};

// Symbol table with id 0 reserved for padding/unknown.
class Vocab {
 public:
  static constexpr int64_t kPadId = 0;

  Vocab() { symbols_.push_back("<pad>"); }
  explicit Vocab(const std::vector<std::string>& sorted_symbols);

  int64_t size() const { return static_cast<int64_t>(symbols_.size()); }
  bool contains(const std::string& s) const { return ids_.count(s) != 0; }
  int64_t id(const std::string& s) const;  // throws UnknownSymbol
  const std::string& symbol(int64_t id) const { return symbols_[static_cast<size_t>(id)]; }

  void save(const std::string& path) const;  // "symbol<TAB>id" lines
  static Vocab load(const std::string& path);
  const std::vector<std::string>& symbols() const { return symbols_; }

 private:
  std::vector<std::string> symbols_;
  std::map<std::string, int64_t> ids_;
};

ScoreEntry parse_transcription(const std::string& line,
                               const std::string& field_separator = "|");
// Inverse of parse for well-formed lines (canonical spacing, %g durations).
std::string format_entry(const ScoreEntry& entry,
                         const std::string& field_separator = "|");

// Deterministic vocabularies over sorted symbol sets; id 0 reserved.
std::pair<Vocab, Vocab> build_vocab(const std::vector<ScoreEntry>& entries);

// "G#4" -> 68, "rest" -> 0 (A4 = 69). Accepts "D#4/Eb4" alternatives.
int note_to_midi(const std::string& note);

// Frames per phoneme via rounding, with the final phoneme absorbing the
// rounding residue so the sum lands on the utterance's total frame count.
// total_frames_override >= 0 pins the target frame count (used when a
// waveform's actual length is authoritative); otherwise the target is
// round(total_duration * sample_rate / frame_hop).
ScoreTokens encode_entry(const ScoreEntry& entry, const Vocab& phoneme_vocab,
                         const Vocab& note_vocab, int64_t frame_hop,
                         int64_t sample_rate,
                         int64_t total_frames_override = -1);

}  // namespace sfs::score
