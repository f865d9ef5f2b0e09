// sfs/plot.h -- spectrogram + pitch-contour rendering to PNG, with a CSV
// sidecar carrying the plotted contour for programmatic checks.
#pragma once

#include <string>
#include <vector>

#include "sfs/dsp.h"
#include "sfs/wav.h"

namespace sfs::plot {

// Log-magnitude spectrogram on a logarithmic frequency axis with the F0
// contour overlaid in blue. Writes <out_path> (PNG) and <out_path>.csv
// ("frame,time_sec,f0_hz"). Deterministic for fixed inputs.
void spectrogram_pitch(const Waveform& wave, const std::vector<double>& f0,
                       const dsp::DspConfig& cfg, const std::string& out_path);

// Minimal PNG writer: 8-bit RGB, stored (uncompressed) deflate blocks.
void write_png(const std::string& path, int64_t width, int64_t height,
               const std::vector<unsigned char>& rgb);

}  // namespace sfs::plot
