// src/fft.cpp
#include "sfs/fft.h"

#include <cmath>

#include "sfs/common.h"

namespace sfs {

void fft_complex(std::vector<double>& reim, int sign) {
  const int64_t n = static_cast<int64_t>(reim.size()) / 2;
  require(is_power_of_two(n), "fft size must be a power of two");

  // bit reversal
  for (int64_t i = 1, j = 0; i < n; ++i) {
    int64_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) {
      std::swap(reim[2 * i], reim[2 * j]);
      std::swap(reim[2 * i + 1], reim[2 * j + 1]);
    }
  }

  for (int64_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * kPi / static_cast<double>(len);
    const double wr = std::cos(ang), wi = std::sin(ang);
    for (int64_t i = 0; i < n; i += len) {
      double cur_r = 1.0, cur_i = 0.0;
      for (int64_t k = 0; k < len / 2; ++k) {
        const int64_t a = i + k, b = i + k + len / 2;
        const double ur = reim[2 * a], ui = reim[2 * a + 1];
        const double vr = reim[2 * b] * cur_r - reim[2 * b + 1] * cur_i;
        const double vi = reim[2 * b] * cur_i + reim[2 * b + 1] * cur_r;
        reim[2 * a] = ur + vr;
        reim[2 * a + 1] = ui + vi;
        reim[2 * b] = ur - vr;
        reim[2 * b + 1] = ui - vi;
        const double nr = cur_r * wr - cur_i * wi;
        cur_i = cur_r * wi + cur_i * wr;
        cur_r = nr;
      }
    }
  }
}

std::vector<double> rfft(const double* x, int64_t n) {
  std::vector<double> buf(static_cast<size_t>(2 * n), 0.0);
  for (int64_t i = 0; i < n; ++i) buf[static_cast<size_t>(2 * i)] = x[i];
  fft_complex(buf, -1);
  std::vector<double> out(static_cast<size_t>(2 * (n / 2 + 1)));
  for (int64_t k = 0; k <= n / 2; ++k) {
    out[static_cast<size_t>(2 * k)] = buf[static_cast<size_t>(2 * k)];
    out[static_cast<size_t>(2 * k + 1)] = buf[static_cast<size_t>(2 * k + 1)];
  }
  return out;
}

}  // namespace sfs
