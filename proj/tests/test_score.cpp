// tests/test_score.cpp
#include <doctest.h>

#include "sfs/score.h"

using namespace sfs;
using namespace sfs::score;

namespace {
const char* kLine =
    "2001000001|感受|g an sh ou|G#4 G#4 D#4 D#4|0.23 0.23 0.50 0.50|"
    "0.08 0.15 0.21 0.29|0 0 0 0";
const char* kLineNormalized =
    "2001000001|感受|g an sh ou|G#4 G#4 D#4 D#4|0.23 0.23 0.5 0.5|"
    "0.08 0.15 0.21 0.29|0 0 0 0";
}

TEST_CASE("parse_transcription: field-by-field round trip") {
  ScoreEntry e = parse_transcription(kLine);
  CHECK(e.utt_id == "2001000001");
  CHECK(e.text == "感受");
  CHECK(e.phonemes == std::vector<std::string>{"g", "an", "sh", "ou"});
  CHECK(e.notes == std::vector<std::string>{"G#4", "G#4", "D#4", "D#4"});
  CHECK(e.note_durations == std::vector<double>{0.23, 0.23, 0.50, 0.50});
  CHECK(e.phoneme_durations == std::vector<double>{0.08, 0.15, 0.21, 0.29});
  CHECK(e.slur_flags == std::vector<int>{0, 0, 0, 0});

  // format(parse(line)) is the normalized line; stable from then on
  CHECK(format_entry(e) == kLineNormalized);
  ScoreEntry again = parse_transcription(format_entry(e));
  CHECK(format_entry(again) == kLineNormalized);
}

TEST_CASE("parse_transcription: errors") {
  CHECK_THROWS_AS(parse_transcription("a|b|c"), MalformedLine);
  // 5 phonemes vs 4 durations
  CHECK_THROWS_AS(
      parse_transcription("id|t|a b c d e|C4 C4 C4 C4|0.1 0.1 0.1 0.1|"
                          "0.1 0.1 0.1 0.1|0 0 0 0 0"),
      LengthMismatch);
  CHECK_THROWS_AS(
      parse_transcription("id|t|a b|C4 C4|0.1 0.1|0.1 0.00|0 0"),
      NonPositiveDuration);
  CHECK_THROWS_AS(
      parse_transcription("id|t|a b|C4 C4|0.1 0.1|0.1 -0.2|0 0"),
      NonPositiveDuration);
  CHECK_THROWS_AS(
      parse_transcription("id|t|a b|C4 XX|0.1 0.1|0.1 0.2|0 0"),
      MalformedLine);
}

TEST_CASE("note_to_midi") {
  CHECK(note_to_midi("A4") == 69);
  CHECK(note_to_midi("C4") == 60);
  CHECK(note_to_midi("G#4") == 68);
  CHECK(note_to_midi("D#4") == 63);
  CHECK(note_to_midi("Eb4") == 63);
  CHECK(note_to_midi("D#4/Eb4") == 63);
  CHECK(note_to_midi("A0") == 21);
  CHECK(note_to_midi("C8") == 108);
  CHECK(note_to_midi("rest") == 0);
  CHECK_THROWS_AS(note_to_midi("H3"), MalformedLine);
}

TEST_CASE("build_vocab: dedup, reserved pad id, determinism") {
  ScoreEntry e1 = parse_transcription("u1|t|a b a|C4 C4 C4|0.1 0.1 0.1|0.1 0.1 0.1|0 0 0");
  ScoreEntry e2 = parse_transcription("u2|t|b a b|D4 D4 D4|0.1 0.1 0.1|0.1 0.1 0.1|0 0 0");

  auto [pv, nv] = build_vocab({e1, e2});
  CHECK(pv.size() == 3);  // pad + a + b
  CHECK(pv.id("a") == 1);
  CHECK(pv.id("b") == 2);
  CHECK(pv.symbol(0) == "<pad>");
  CHECK(nv.size() == 3);  // pad + C4 + D4

  auto [pv2, nv2] = build_vocab({e1, e2});
  CHECK(pv2.symbols() == pv.symbols());
  CHECK(nv2.symbols() == nv.symbols());

  CHECK_THROWS_AS(build_vocab({}), EmptyCorpus);
  CHECK_THROWS_AS(pv.id("zz"), UnknownSymbol);
}

TEST_CASE("encode_entry: frame rounding") {
  // 0.5 s at 44100 Hz, hop 512 -> round(43.07) = 43
  ScoreEntry e = parse_transcription("u|t|a|C4|0.5|0.5|0");
  ScoreEntry e2 = parse_transcription("u|t|a b|C4 C4|0.5 0.5|0.5 0.5|0 0");
  auto [pv, nv] = build_vocab({e, e2});
  ScoreTokens t = encode_entry(e, pv, nv, 512, 44100);
  CHECK(t.duration_frames == std::vector<int64_t>{43});

  // total 1.0 s split 0.5/0.5 -> frames sum to round(86.13) = 86
  ScoreTokens t2 = encode_entry(e2, pv, nv, 512, 44100);
  CHECK(t2.total_frames() == 86);
  CHECK(t2.duration_frames[0] == 43);
  CHECK(t2.duration_frames[1] == 43);

  CHECK(t2.midi_ids == std::vector<int64_t>{60, 60});
}

TEST_CASE("encode_entry: sum-preserving rounding oracle on random splits") {
  Rng rng(99);
  auto [pv, nv] = build_vocab(
      {parse_transcription("u|t|a|C4|0.5|0.5|0")});
  for (int trial = 0; trial < 50; ++trial) {
    const int n = static_cast<int>(rng.randint(1, 8));
    ScoreEntry e;
    e.utt_id = "r";
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = rng.uniform(0.05, 0.8);
      e.phonemes.push_back("a");
      e.notes.push_back("C4");
      e.phoneme_durations.push_back(d);
      e.note_durations.push_back(d);
      e.slur_flags.push_back(0);
      total += d;
    }
    ScoreTokens t = encode_entry(e, pv, nv, 512, 44100);
    const int64_t target = std::llround(total * 44100.0 / 512.0);
    CHECK(std::llabs(t.total_frames() - target) <= 1);
    for (int64_t f : t.duration_frames) CHECK(f >= 0);

    // determinism
    ScoreTokens t2 = encode_entry(e, pv, nv, 512, 44100);
    CHECK(t.phoneme_ids == t2.phoneme_ids);
    CHECK(t.duration_frames == t2.duration_frames);
  }
}

TEST_CASE("encode_entry: explicit total override and unknown symbols") {
  ScoreEntry e = parse_transcription("u|t|a b|C4 C4|0.5 0.5|0.5 0.5|0 0");
  auto [pv, nv] = build_vocab({e});
  ScoreTokens t = encode_entry(e, pv, nv, 512, 44100, 90);
  CHECK(t.total_frames() == 90);

  // a pinned target shorter than the rounded sum squeezes trailing phonemes
  ScoreTokens squeezed = encode_entry(e, pv, nv, 512, 44100, 30);
  CHECK(squeezed.total_frames() == 30);
  CHECK(squeezed.duration_frames[0] == 30);
  CHECK(squeezed.duration_frames[1] == 0);

  ScoreEntry bad = e;
  bad.phonemes[1] = "zz";
  CHECK_THROWS_AS(encode_entry(bad, pv, nv, 512, 44100), UnknownSymbol);
}

TEST_CASE("vocab file round trip") {
  ScoreEntry e = parse_transcription("u|t|a b|C4 D4|0.5 0.5|0.5 0.5|0 1");
  auto [pv, nv] = build_vocab({e});
  const std::string path = "vocab_test.txt";
  pv.save(path);
  Vocab loaded = Vocab::load(path);
  CHECK(loaded.symbols() == pv.symbols());
  std::remove(path.c_str());
}
