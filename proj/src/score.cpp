// src/score.cpp
#include "sfs/score.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace sfs::score {

namespace {

std::vector<std::string> split(const std::string& s, const std::string& sep) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (true) {
    const size_t next = s.find(sep, pos);
    if (next == std::string::npos) {
      out.push_back(s.substr(pos));
      break;
    }
    out.push_back(s.substr(pos, next - pos));
    pos = next + sep.size();
  }
  return out;
}

std::vector<std::string> split_items(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string item;
  while (in >> item) out.push_back(item);
  return out;
}

std::vector<double> parse_durations(const std::string& field, const char* what) {
  std::vector<double> out;
  for (const std::string& item : split_items(field)) {
    size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw MalformedLine(std::string(what) + ": bad duration '" + item + "'");
    }
    if (used != item.size())
      throw MalformedLine(std::string(what) + ": bad duration '" + item + "'");
    if (!(v > 0.0))
      throw NonPositiveDuration(std::string(what) + ": duration '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::string format_duration(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

ScoreEntry parse_transcription(const std::string& line,
                               const std::string& field_separator) {
  const auto fields = split(line, field_separator);
  if (fields.size() != 7)
    throw MalformedLine("expected 7 fields, got " + std::to_string(fields.size()));

  ScoreEntry e;
  e.utt_id = fields[0];
  e.text = fields[1];
  e.phonemes = split_items(fields[2]);
  e.notes = split_items(fields[3]);
  e.note_durations = parse_durations(fields[4], "note_durations");
  e.phoneme_durations = parse_durations(fields[5], "phoneme_durations");
  for (const std::string& s : split_items(fields[6])) {
    if (s != "0" && s != "1") throw MalformedLine("slur flag '" + s + "'");
    e.slur_flags.push_back(s == "1" ? 1 : 0);
  }

  if (e.phonemes.empty()) throw MalformedLine("no phonemes");
  if (e.phonemes.size() != e.phoneme_durations.size() ||
      e.phonemes.size() != e.slur_flags.size())
    throw LengthMismatch("phonemes=" + std::to_string(e.phonemes.size()) +
                         " phoneme_durations=" + std::to_string(e.phoneme_durations.size()) +
                         " slurs=" + std::to_string(e.slur_flags.size()));
  if (e.notes.size() != e.note_durations.size())
    throw LengthMismatch("notes=" + std::to_string(e.notes.size()) +
                         " note_durations=" + std::to_string(e.note_durations.size()));
  for (const std::string& n : e.notes) note_to_midi(n);  // validates labels
  return e;
}

std::string format_entry(const ScoreEntry& e, const std::string& sep) {
  auto join = [](const auto& items, auto fmt) {
    std::string out;
    for (size_t i = 0; i < items.size(); ++i) {
      if (i) out += ' ';
      out += fmt(items[i]);
    }
    return out;
  };
  std::string line = e.utt_id + sep + e.text + sep;
  line += join(e.phonemes, [](const std::string& s) { return s; }) + sep;
  line += join(e.notes, [](const std::string& s) { return s; }) + sep;
  line += join(e.note_durations, format_duration) + sep;
  line += join(e.phoneme_durations, format_duration) + sep;
  line += join(e.slur_flags, [](int v) { return std::string(v ? "1" : "0"); });
  return line;
}

Vocab::Vocab(const std::vector<std::string>& sorted_symbols) {
  symbols_.push_back("<pad>");
  for (const std::string& s : sorted_symbols) {
    require(!ids_.count(s), "vocab symbols unique");
    ids_[s] = static_cast<int64_t>(symbols_.size());
    symbols_.push_back(s);
  }
}

int64_t Vocab::id(const std::string& s) const {
  auto it = ids_.find(s);
  if (it == ids_.end()) throw UnknownSymbol(s);
  return it->second;
}

void Vocab::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IOError("cannot write " + path);
  for (size_t i = 0; i < symbols_.size(); ++i)
    out << symbols_[i] << '\t' << i << '\n';
}

Vocab Vocab::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot read " + path);
  std::vector<std::string> symbols;
  std::string line;
  int64_t expect = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const size_t tab = line.find('\t');
    if (tab == std::string::npos) throw IOError(path + ": malformed vocab line");
    const std::string sym = line.substr(0, tab);
    const int64_t id = std::stoll(line.substr(tab + 1));
    if (id != expect) throw IOError(path + ": non-contiguous vocab ids");
    if (expect == 0) {
      if (sym != "<pad>") throw IOError(path + ": id 0 must be <pad>");
    } else {
      symbols.push_back(sym);
    }
    ++expect;
  }
  return Vocab(symbols);
}

std::pair<Vocab, Vocab> build_vocab(const std::vector<ScoreEntry>& entries) {
  if (entries.empty()) throw EmptyCorpus("no entries");
  std::set<std::string> phonemes, notes;
  for (const ScoreEntry& e : entries) {
    phonemes.insert(e.phonemes.begin(), e.phonemes.end());
    notes.insert(e.notes.begin(), e.notes.end());
  }
  return {Vocab({phonemes.begin(), phonemes.end()}),
          Vocab({notes.begin(), notes.end()})};
}

int note_to_midi(const std::string& note) {
  if (note == "rest") return 0;
  // take the first alternative of slash-separated spellings
  const std::string name = note.substr(0, note.find('/'));
  if (name.size() < 2) throw MalformedLine("bad note label '" + note + "'");
  static const int kBase[7] = {9, 11, 0, 2, 4, 5, 7};  // A B C D E F G
  const char letter = name[0];
  if (letter < 'A' || letter > 'G') throw MalformedLine("bad note label '" + note + "'");
  int semitone = kBase[letter - 'A'];
  size_t pos = 1;
  if (name[pos] == '#') {
    ++semitone;
    ++pos;
  } else if (name[pos] == 'b') {
    --semitone;
    ++pos;
  }
  if (pos >= name.size()) throw MalformedLine("bad note label '" + note + "'");
  int octave = 0;
  try {
    size_t used = 0;
    octave = std::stoi(name.substr(pos), &used);
    if (pos + used != name.size()) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw MalformedLine("bad note label '" + note + "'");
  }
  const int midi = 12 * (octave + 1) + semitone;
  if (midi < 1 || midi > 127) throw MalformedLine("note out of MIDI range '" + note + "'");
  return midi;
}

ScoreTokens encode_entry(const ScoreEntry& e, const Vocab& phoneme_vocab,
                         const Vocab& note_vocab, int64_t frame_hop,
                         int64_t sample_rate, int64_t total_frames_override) {
  require(frame_hop > 0 && sample_rate > 0, "positive hop and rate");
  if (e.notes.size() != e.phonemes.size())
    throw LengthMismatch("notes (" + std::to_string(e.notes.size()) +
                         ") must align to phonemes (" +
                         std::to_string(e.phonemes.size()) + ") for encoding");

  ScoreTokens t;
  t.utt_id = e.utt_id;
  const double frames_per_sec =
      static_cast<double>(sample_rate) / static_cast<double>(frame_hop);
  for (size_t i = 0; i < e.phonemes.size(); ++i) {
    t.phoneme_ids.push_back(phoneme_vocab.id(e.phonemes[i]));
    t.note_ids.push_back(note_vocab.id(e.notes[i]));
    t.midi_ids.push_back(note_to_midi(e.notes[i]));
    t.slur_ids.push_back(e.slur_flags[i]);
    t.duration_frames.push_back(
        std::llround(e.phoneme_durations[i] * frames_per_sec));
    t.note_duration_frames.push_back(
        std::llround(e.note_durations[i] * frames_per_sec));
  }

  const int64_t target =
      total_frames_override >= 0
          ? total_frames_override
          : std::llround(e.total_duration() * frames_per_sec);
  int64_t partial = 0;
  for (size_t i = 0; i + 1 < t.duration_frames.size(); ++i)
    partial += t.duration_frames[i];
  int64_t last = target - partial;
  if (last < 0) {
    // rounding overshoot (or a pinned short target): walk backwards and
    // shrink earlier phonemes until the sum lands exactly on the target
    int64_t excess = -last;
    last = 0;
    for (size_t i = t.duration_frames.size() - 1; i-- > 0 && excess > 0;) {
      const int64_t take = std::min(excess, t.duration_frames[i]);
      t.duration_frames[i] -= take;
      excess -= take;
    }
  }
  t.duration_frames.back() = last;
  return t;
}

}  // namespace sfs::score
