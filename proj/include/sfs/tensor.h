// sfs/tensor.h -- dense row-major double tensor, up to 3 dims.
#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

#include "sfs/common.h"

namespace sfs {

struct Tensor {
  std::vector<int64_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int64_t> s) : shape(std::move(s)) {
    data.assign(static_cast<size_t>(numel_of(shape)), 0.0);
  }
  Tensor(std::vector<int64_t> s, std::vector<double> d)
      : shape(std::move(s)), data(std::move(d)) {
    require(static_cast<int64_t>(data.size()) == numel_of(shape),
            "tensor data size matches shape");
  }

  static int64_t numel_of(const std::vector<int64_t>& s) {
    int64_t n = 1;
    for (int64_t d : s) n *= d;
    return n;
  }
  static Tensor zeros(std::vector<int64_t> s) { return Tensor(std::move(s)); }
  static Tensor full(std::vector<int64_t> s, double v) {
    Tensor t(std::move(s));
    std::fill(t.data.begin(), t.data.end(), v);
    return t;
  }
  static Tensor scalar(double v) { return Tensor({1}, {v}); }
  static Tensor from_vector(const std::vector<double>& v) {
    return Tensor({static_cast<int64_t>(v.size())}, v);
  }

  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  int ndim() const { return static_cast<int>(shape.size()); }
  int64_t dim(int i) const { return shape[static_cast<size_t>(i)]; }

  // 2-D accessors (row-major)
  int64_t rows() const { return ndim() >= 1 ? shape[0] : 0; }
  int64_t cols() const { return ndim() >= 2 ? shape[1] : 1; }
  double& at(int64_t r, int64_t c) { return data[static_cast<size_t>(r * cols() + c)]; }
  double at(int64_t r, int64_t c) const { return data[static_cast<size_t>(r * cols() + c)]; }

  double* ptr() { return data.data(); }
  const double* ptr() const { return data.data(); }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  bool all_finite() const;

  void fill(double v) { std::fill(data.begin(), data.end(), v); }
  void add_(const Tensor& o) {
    require(same_shape(o), "add_: shape match");
    for (size_t i = 0; i < data.size(); ++i) data[i] += o.data[i];
  }
  void scale_(double s) {
    for (double& v : data) v *= s;
  }
};

// C = alpha * op(A) * op(B) + beta * C, row-major. Backed by Eigen.
void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k,
          double alpha, const double* a, int64_t lda, const double* b,
          int64_t ldb, double beta, double* c, int64_t ldc);

}  // namespace sfs
