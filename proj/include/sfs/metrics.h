// sfs/metrics.h -- objective evaluation metrics over F0 tracks and
// mel-spectrograms, computed on teacher-forced (equal-length) frames.
#pragma once

#include <vector>

#include "sfs/tensor.h"

namespace sfs::metrics {

// RMSE in Hz over frames voiced in both tracks; NoVoicedOverlap when the
// voicing masks never intersect.
double f0_rmse(const std::vector<double>& f0_ref, const std::vector<double>& f0_syn,
               const std::vector<char>& vuv_ref, const std::vector<char>& vuv_syn);

// RMSE over two log-mel matrices of identical shape.
double mel_rmse(const Tensor& mel_ref, const Tensor& mel_syn);

// Pearson correlation over mutually voiced frames (needs at least 2 and
// non-constant tracks; DegenerateVariance otherwise).
double f0_corr(const std::vector<double>& f0_ref, const std::vector<double>& f0_syn,
               const std::vector<char>& vuv_ref, const std::vector<char>& vuv_syn);

// Percentage of frames whose voicing decisions disagree.
double vuv_error_percent(const std::vector<char>& vuv_ref,
                         const std::vector<char>& vuv_syn);

}  // namespace sfs::metrics
