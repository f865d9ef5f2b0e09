// src/metrics.cpp
#include "sfs/metrics.h"

#include <cmath>

#include "sfs/common.h"

namespace sfs::metrics {

double f0_rmse(const std::vector<double>& f0_ref, const std::vector<double>& f0_syn,
               const std::vector<char>& vuv_ref, const std::vector<char>& vuv_syn) {
  if (f0_ref.size() != f0_syn.size() || vuv_ref.size() != f0_ref.size() ||
      vuv_syn.size() != f0_ref.size())
    throw ShapeMismatch("f0_rmse: track lengths differ");
  double sq = 0.0;
  int64_t n = 0;
  for (size_t t = 0; t < f0_ref.size(); ++t)
    if (vuv_ref[t] && vuv_syn[t]) {
      const double d = f0_ref[t] - f0_syn[t];
      sq += d * d;
      ++n;
    }
  if (n == 0) throw NoVoicedOverlap("no frames voiced in both tracks");
  return std::sqrt(sq / static_cast<double>(n));
}

double mel_rmse(const Tensor& mel_ref, const Tensor& mel_syn) {
  if (!mel_ref.same_shape(mel_syn)) throw ShapeMismatch("mel_rmse: shapes differ");
  double sq = 0.0;
  for (size_t i = 0; i < mel_ref.data.size(); ++i) {
    const double d = mel_ref.data[i] - mel_syn.data[i];
    sq += d * d;
  }
  return std::sqrt(sq / static_cast<double>(mel_ref.numel()));
}

double f0_corr(const std::vector<double>& f0_ref, const std::vector<double>& f0_syn,
               const std::vector<char>& vuv_ref, const std::vector<char>& vuv_syn) {
  if (f0_ref.size() != f0_syn.size() || vuv_ref.size() != f0_ref.size() ||
      vuv_syn.size() != f0_ref.size())
    throw ShapeMismatch("f0_corr: track lengths differ");
  std::vector<double> a, b;
  for (size_t t = 0; t < f0_ref.size(); ++t)
    if (vuv_ref[t] && vuv_syn[t]) {
      a.push_back(f0_ref[t]);
      b.push_back(f0_syn[t]);
    }
  if (a.size() < 2) throw NoVoicedOverlap("need at least 2 mutually voiced frames");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (va <= 1e-12 || vb <= 1e-12)
    throw DegenerateVariance("constant F0 track has no defined correlation");
  return cov / std::sqrt(va * vb);
}

double vuv_error_percent(const std::vector<char>& vuv_ref,
                         const std::vector<char>& vuv_syn) {
  if (vuv_ref.size() != vuv_syn.size())
    throw ShapeMismatch("vuv_error: lengths differ");
  if (vuv_ref.empty()) return 0.0;
  int64_t wrong = 0;
  for (size_t t = 0; t < vuv_ref.size(); ++t)
    if ((vuv_ref[t] != 0) != (vuv_syn[t] != 0)) ++wrong;
  return 100.0 * static_cast<double>(wrong) / static_cast<double>(vuv_ref.size());
}

}  // namespace sfs::metrics
