// src/wav.cpp
#include "sfs/wav.h"

#include <algorithm>
#include <cstring>
#include <fstream>

namespace sfs {

namespace {

uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

uint16_t read_u16(std::istream& in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

void write_u32(std::ostream& out, uint32_t v) {
  const char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8),
                     static_cast<char>(v >> 16), static_cast<char>(v >> 24)};
  out.write(b, 4);
}

void write_u16(std::ostream& out, uint16_t v) {
  const char b[2] = {static_cast<char>(v), static_cast<char>(v >> 8)};
  out.write(b, 2);
}

}  // namespace

Waveform read_wav(const std::string& path, int expected_rate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open " + path);

  char tag[4];
  in.read(tag, 4);
  if (std::memcmp(tag, "RIFF", 4) != 0) throw IOError(path + ": not a RIFF file");
  read_u32(in);  // riff size
  in.read(tag, 4);
  if (std::memcmp(tag, "WAVE", 4) != 0) throw IOError(path + ": not a WAVE file");

  Waveform wave;
  int channels = 0, bits = 0;
  bool got_fmt = false, got_data = false;
  while (in.read(tag, 4)) {
    const uint32_t size = read_u32(in);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      const uint16_t format = read_u16(in);
      channels = read_u16(in);
      wave.sample_rate = static_cast<int>(read_u32(in));
      read_u32(in);  // byte rate
      read_u16(in);  // block align
      bits = read_u16(in);
      if (size > 16) in.seekg(size - 16, std::ios::cur);
      if (format != 1) throw IOError(path + ": only PCM supported");
      got_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!got_fmt) throw IOError(path + ": data chunk before fmt");
      if (channels != 1) throw IOError(path + ": only mono supported");
      if (bits != 16) throw IOError(path + ": only 16-bit PCM supported");
      const uint32_t n = size / 2;
      wave.samples.resize(n);
      std::vector<char> raw(size);
      in.read(raw.data(), size);
      if (!in) throw IOError(path + ": truncated data chunk");
      for (uint32_t i = 0; i < n; ++i) {
        const int16_t s = static_cast<int16_t>(
            static_cast<unsigned char>(raw[2 * i]) |
            (static_cast<unsigned char>(raw[2 * i + 1]) << 8));
        wave.samples[i] = static_cast<double>(s) / 32768.0;
      }
      got_data = true;
      break;
    } else {
      in.seekg(size + (size & 1), std::ios::cur);
    }
  }
  if (!got_data) throw IOError(path + ": no data chunk");
  if (expected_rate > 0 && wave.sample_rate != expected_rate)
    throw WrongSampleRate(path + ": expected " + std::to_string(expected_rate) +
                          " Hz, got " + std::to_string(wave.sample_rate));
  return wave;
}

void write_wav(const std::string& path, const Waveform& wave) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot open " + path + " for writing");

  const uint32_t n = static_cast<uint32_t>(wave.samples.size());
  out.write("RIFF", 4);
  write_u32(out, 36 + 2 * n);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_u32(out, 16);
  write_u16(out, 1);  // PCM
  write_u16(out, 1);  // mono
  write_u32(out, static_cast<uint32_t>(wave.sample_rate));
  write_u32(out, static_cast<uint32_t>(wave.sample_rate * 2));
  write_u16(out, 2);
  write_u16(out, 16);
  out.write("data", 4);
  write_u32(out, 2 * n);
  for (double v : wave.samples) {
    const double clamped = std::clamp(v, -1.0, 1.0);
    const int16_t s = static_cast<int16_t>(std::lrint(clamped * 32767.0));
    const char b[2] = {static_cast<char>(s & 0xff),
                       static_cast<char>((s >> 8) & 0xff)};
    out.write(b, 2);
  }
  if (!out) throw IOError(path + ": write failed");
}

}  // namespace sfs
