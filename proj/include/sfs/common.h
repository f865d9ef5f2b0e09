// sfs/common.h -- shared error types, RNG and small helpers.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace sfs {

// Typed errors. Each maps to one failure condition named in the module
// contracts; catching sfs::Error catches all of them.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define SFS_DEFINE_ERROR(NAME)                                   \
  struct NAME : Error {                                          \
    explicit NAME(const std::string& msg) : Error(#NAME ": " + msg) {} \
  }

SFS_DEFINE_ERROR(MalformedLine);
SFS_DEFINE_ERROR(LengthMismatch);
SFS_DEFINE_ERROR(NonPositiveDuration);
SFS_DEFINE_ERROR(EmptyCorpus);
SFS_DEFINE_ERROR(UnknownSymbol);
SFS_DEFINE_ERROR(TooShortSignal);
SFS_DEFINE_ERROR(UnsupportedRatio);
SFS_DEFINE_ERROR(DegenerateDimension);
SFS_DEFINE_ERROR(NegativeF0);
SFS_DEFINE_ERROR(ShapeMismatch);
SFS_DEFINE_ERROR(NegativeDuration);
SFS_DEFINE_ERROR(FrameMisalignment);
SFS_DEFINE_ERROR(StructureMismatch);
SFS_DEFINE_ERROR(WrongSampleRate);
SFS_DEFINE_ERROR(NotNormalized);
SFS_DEFINE_ERROR(NoVoicedOverlap);
SFS_DEFINE_ERROR(DegenerateVariance);
SFS_DEFINE_ERROR(NonFiniteLoss);
SFS_DEFINE_ERROR(CorruptCheckpoint);
SFS_DEFINE_ERROR(VersionMismatch);
SFS_DEFINE_ERROR(IOError);

#undef SFS_DEFINE_ERROR

inline void require(bool cond, const char* what) {
  if (!cond) throw Error(std::string("requirement failed: ") + what);
}

// Deterministic RNG. All stochastic pieces (init, noise, dropout, sampling)
// draw from an explicitly seeded instance so runs are reproducible.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : gen_(seed) {}

  void seed(uint64_t s) { gen_.seed(s); }

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(gen_);
  }
  int64_t randint(int64_t lo, int64_t hi) {  // inclusive range
    return std::uniform_int_distribution<int64_t>(lo, hi)(gen_);
  }
  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

constexpr double kPi = 3.14159265358979323846;

inline double hz_to_cents(double hz) { return 1200.0 * std::log2(hz / 10.0); }
inline double cents_to_hz(double cents) { return 10.0 * std::exp2(cents / 1200.0); }

}  // namespace sfs
