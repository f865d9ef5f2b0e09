// sfs/fft.h -- iterative radix-2 complex FFT (power-of-two sizes).
#pragma once

#include <cstdint>
#include <vector>

namespace sfs {

// In-place complex FFT over interleaved (re, im) pairs. sign = -1 gives the
// forward transform e^{-i2pi kn/N}; sign = +1 the unscaled inverse direction.
void fft_complex(std::vector<double>& reim, int sign);

// Real-input forward FFT: returns N/2+1 interleaved (re, im) pairs.
std::vector<double> rfft(const double* x, int64_t n);

inline bool is_power_of_two(int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace sfs
