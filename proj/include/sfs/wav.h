// sfs/wav.h -- 16-bit PCM mono WAV read/write.
#pragma once

#include <string>
#include <vector>

#include "sfs/common.h"

namespace sfs {

struct Waveform {
  std::vector<double> samples;  // in [-1, 1]
  int sample_rate = 44100;

  int64_t size() const { return static_cast<int64_t>(samples.size()); }
  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Rejects anything but 16-bit PCM mono; expected_rate > 0 also pins the rate.
Waveform read_wav(const std::string& path, int expected_rate = 0);
void write_wav(const std::string& path, const Waveform& wave);

}  // namespace sfs
