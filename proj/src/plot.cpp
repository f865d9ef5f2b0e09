// src/plot.cpp
#include "sfs/plot.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace sfs::plot {

namespace {

uint32_t crc32(const unsigned char* data, size_t len, uint32_t crc = 0) {
  static uint32_t table[256];
  static bool init = false;
  if (!init) {
    for (uint32_t i = 0; i < 256; ++i) {
      uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
      table[i] = c;
    }
    init = true;
  }
  crc ^= 0xffffffffu;
  for (size_t i = 0; i < len; ++i) crc = table[(crc ^ data[i]) & 0xff] ^ (crc >> 8);
  return crc ^ 0xffffffffu;
}

void put_u32(std::vector<unsigned char>& v, uint32_t x) {
  v.push_back(static_cast<unsigned char>(x >> 24));
  v.push_back(static_cast<unsigned char>(x >> 16));
  v.push_back(static_cast<unsigned char>(x >> 8));
  v.push_back(static_cast<unsigned char>(x));
}

void write_chunk(std::ofstream& out, const char type[4],
                 const std::vector<unsigned char>& payload) {
  std::vector<unsigned char> buf;
  put_u32(buf, static_cast<uint32_t>(payload.size()));
  buf.insert(buf.end(), type, type + 4);
  buf.insert(buf.end(), payload.begin(), payload.end());
  const uint32_t crc = crc32(buf.data() + 4, buf.size() - 4);
  put_u32(buf, crc);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
}

// raw deflate stream of stored blocks + zlib wrapper
std::vector<unsigned char> zlib_stored(const std::vector<unsigned char>& raw) {
  std::vector<unsigned char> z;
  z.push_back(0x78);
  z.push_back(0x01);
  size_t at = 0;
  while (at < raw.size() || raw.empty()) {
    const size_t block = std::min<size_t>(65535, raw.size() - at);
    const bool last = at + block >= raw.size();
    z.push_back(last ? 1 : 0);
    z.push_back(static_cast<unsigned char>(block & 0xff));
    z.push_back(static_cast<unsigned char>(block >> 8));
    z.push_back(static_cast<unsigned char>(~block & 0xff));
    z.push_back(static_cast<unsigned char>((~block >> 8) & 0xff));
    z.insert(z.end(), raw.begin() + static_cast<std::ptrdiff_t>(at),
             raw.begin() + static_cast<std::ptrdiff_t>(at + block));
    at += block;
    if (raw.empty()) break;
  }
  uint32_t a = 1, b = 0;
  for (unsigned char c : raw) {
    a = (a + c) % 65521;
    b = (b + a) % 65521;
  }
  put_u32(z, (b << 16) | a);
  return z;
}

struct Rgb {
  unsigned char r, g, b;
};

// compact magma-like gradient
Rgb colormap(double v) {
  v = std::clamp(v, 0.0, 1.0);
  static const double stops[5][3] = {{0.0, 0.0, 0.02},
                                     {0.23, 0.06, 0.44},
                                     {0.72, 0.21, 0.47},
                                     {0.98, 0.55, 0.23},
                                     {0.99, 0.99, 0.75}};
  const double x = v * 4.0;
  const int i = std::min(3, static_cast<int>(x));
  const double f = x - i;
  Rgb c;
  c.r = static_cast<unsigned char>(255.0 * (stops[i][0] + f * (stops[i + 1][0] - stops[i][0])));
  c.g = static_cast<unsigned char>(255.0 * (stops[i][1] + f * (stops[i + 1][1] - stops[i][1])));
  c.b = static_cast<unsigned char>(255.0 * (stops[i][2] + f * (stops[i + 1][2] - stops[i][2])));
  return c;
}

}  // namespace

void write_png(const std::string& path, int64_t width, int64_t height,
               const std::vector<unsigned char>& rgb) {
  require(static_cast<int64_t>(rgb.size()) == width * height * 3, "rgb buffer size");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot write " + path);
  static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  out.write(reinterpret_cast<const char*>(sig), 8);

  std::vector<unsigned char> ihdr;
  put_u32(ihdr, static_cast<uint32_t>(width));
  put_u32(ihdr, static_cast<uint32_t>(height));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(2);   // truecolor
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);
  write_chunk(out, "IHDR", ihdr);

  std::vector<unsigned char> raw;
  raw.reserve(static_cast<size_t>(height * (1 + width * 3)));
  for (int64_t y = 0; y < height; ++y) {
    raw.push_back(0);  // filter: none
    raw.insert(raw.end(), rgb.begin() + y * width * 3,
               rgb.begin() + (y + 1) * width * 3);
  }
  write_chunk(out, "IDAT", zlib_stored(raw));
  write_chunk(out, "IEND", {});
  if (!out) throw IOError(path + ": write failed");
}

void spectrogram_pitch(const Waveform& wave, const std::vector<double>& f0,
                       const dsp::DspConfig& cfg, const std::string& out_path) {
  Tensor mag = dsp::stft_magnitude(wave, cfg.stft);
  const int64_t t_frames = mag.rows();
  const int64_t bins = mag.cols();
  const int64_t width = t_frames;
  const int64_t height = 360;
  const double f_lo = 40.0, f_hi = cfg.sample_rate / 2.0;
  const double nyquist = cfg.sample_rate / 2.0;

  // dB floor 80 below the global peak
  double peak = 1e-12;
  for (double v : mag.data) peak = std::max(peak, v);
  const double db_floor = 20.0 * std::log10(peak) - 80.0;

  std::vector<unsigned char> rgb(static_cast<size_t>(width * height * 3), 0);
  for (int64_t y = 0; y < height; ++y) {
    // log-frequency axis, top row = f_hi
    const double frac = 1.0 - static_cast<double>(y) / static_cast<double>(height - 1);
    const double freq = f_lo * std::pow(f_hi / f_lo, frac);
    const double bin_pos = freq / nyquist * static_cast<double>(bins - 1);
    const int64_t b0 = std::min<int64_t>(bins - 2, static_cast<int64_t>(bin_pos));
    const double fb = bin_pos - static_cast<double>(b0);
    for (int64_t x = 0; x < width; ++x) {
      const double m = (1.0 - fb) * mag.at(x, b0) + fb * mag.at(x, b0 + 1);
      const double db = 20.0 * std::log10(std::max(m, 1e-12));
      const double v = (db - db_floor) / 80.0;
      const Rgb c = colormap(v);
      const size_t at = static_cast<size_t>((y * width + x) * 3);
      rgb[at] = c.r;
      rgb[at + 1] = c.g;
      rgb[at + 2] = c.b;
    }
  }

  // pitch contour in blue on the same log axis
  for (int64_t x = 0; x < width && x < static_cast<int64_t>(f0.size()); ++x) {
    const double hz = f0[static_cast<size_t>(x)];
    if (hz <= 0.0) continue;
    const double frac = std::log(std::clamp(hz, f_lo, f_hi) / f_lo) / std::log(f_hi / f_lo);
    const int64_t y_mid = std::clamp<int64_t>(
        static_cast<int64_t>((1.0 - frac) * static_cast<double>(height - 1)), 1,
        height - 2);
    for (int64_t dy = -1; dy <= 1; ++dy) {
      const size_t at = static_cast<size_t>(((y_mid + dy) * width + x) * 3);
      rgb[at] = 40;
      rgb[at + 1] = 90;
      rgb[at + 2] = 255;
    }
  }
  write_png(out_path, width, height, rgb);

  std::ofstream csv(out_path + ".csv");
  if (!csv) throw IOError("cannot write " + out_path + ".csv");
  csv << "frame,time_sec,f0_hz\n";
  for (size_t t = 0; t < f0.size(); ++t) {
    char line[96];
    std::snprintf(line, sizeof(line), "%zu,%.6f,%.3f\n", t,
                  static_cast<double>(t * cfg.stft.hop) / cfg.sample_rate, f0[t]);
    csv << line;
  }
}

}  // namespace sfs::plot
