// src/tensor.cpp
#include "sfs/tensor.h"

#include <Eigen/Core>

namespace sfs {

bool Tensor::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

using MapM = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>,
                        Eigen::Unaligned, Eigen::OuterStride<>>;
using MapMut = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>,
                          Eigen::Unaligned, Eigen::OuterStride<>>;

void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k,
          double alpha, const double* a, int64_t lda, const double* b,
          int64_t ldb, double beta, double* c, int64_t ldc) {
  MapM A(a, trans_a ? k : m, trans_a ? m : k, Eigen::OuterStride<>(lda));
  MapM B(b, trans_b ? n : k, trans_b ? k : n, Eigen::OuterStride<>(ldb));
  MapMut C(c, m, n, Eigen::OuterStride<>(ldc));
  if (beta == 0.0)
    C.setZero();
  else if (beta != 1.0)
    C *= beta;
  if (!trans_a && !trans_b)
    C.noalias() += alpha * A * B;
  else if (trans_a && !trans_b)
    C.noalias() += alpha * A.transpose() * B;
  else if (!trans_a && trans_b)
    C.noalias() += alpha * A * B.transpose();
  else
    C.noalias() += alpha * A.transpose() * B.transpose();
}

}  // namespace sfs
