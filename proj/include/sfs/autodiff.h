// sfs/autodiff.h -- tape-based reverse-mode autodiff over Tensor.
//
// Eager define-by-run graph: every op returns a Var holding the result and a
// backward closure. backward(loss) walks the tape in reverse topological
// order and accumulates gradients into every node with requires_grad set.
// Custom linear ops (resampling, FFT) are built on make_op from dsp code.
#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "sfs/common.h"
#include "sfs/tensor.h"

namespace sfs::ad {

struct Node;
using NodePtr = std::shared_ptr<Node>;

struct Node {
  Tensor value;
  Tensor grad;
  bool requires_grad = false;
  bool has_grad = false;
  std::vector<NodePtr> parents;
  std::function<void(Node&)> backfn;

  // Accumulate g into this node's gradient (no-op unless requires_grad).
  void accum(const Tensor& g);
  Tensor& ensure_grad();
  void clear_grad() { has_grad = false; }
};

class Var {
 public:
  Var() = default;
  explicit Var(NodePtr n) : node_(std::move(n)) {}

  static Var constant(Tensor v);
  static Var leaf(Tensor v, bool requires_grad);

  bool defined() const { return node_ != nullptr; }
  const Tensor& val() const { return node_->value; }
  Tensor& val() { return node_->value; }
  const Tensor& grad() const { return node_->grad; }
  bool has_grad() const { return node_->has_grad; }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  NodePtr node() const { return node_; }

  Var detach() const { return constant(node_->value); }
  double item() const {
    require(node_->value.numel() == 1, "item() needs a scalar");
    return node_->value.data[0];
  }

 private:
  NodePtr node_;
};

// Global tape switch; when disabled, ops produce value-only nodes.
bool grad_enabled();
struct NoGradGuard {
  NoGradGuard();
  ~NoGradGuard();
  bool prev;
};

// Generic op constructor: value + parents + backward closure. The closure
// receives the result node and must push gradients into node.parents.
Var make_op(Tensor value, std::vector<Var> parents,
            std::function<void(Node&)> backfn);

void backward(const Var& loss);

// ---- elementwise / scalar ----
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var neg(const Var& a);
Var sadd(const Var& a, double s);
Var smul(const Var& a, double s);
Var relu(const Var& a);
Var leaky_relu(const Var& a, double slope);
Var gelu(const Var& a);
Var tanh_act(const Var& a);
Var sigmoid(const Var& a);
Var exp_(const Var& a);
Var log_(const Var& a);
Var sqrt_(const Var& a);
Var recip(const Var& a);
Var abs_(const Var& a);
Var square(const Var& a);

// ---- broadcast helpers ----
Var add_rowvec(const Var& x, const Var& b);   // [T,C] + [C]
Var mul_rowvec(const Var& x, const Var& b);   // [T,C] * [C]
Var sub_colvec(const Var& x, const Var& c);   // [T,C] - [T,1]
Var mul_colvec(const Var& x, const Var& c);   // [T,C] * [T,1]

// ---- shape ----
Var reshape(const Var& x, std::vector<int64_t> shape);
Var slice_rows(const Var& x, int64_t r0, int64_t r1);
Var slice_cols(const Var& x, int64_t c0, int64_t c1);
Var concat_rows(const std::vector<Var>& xs);
Var concat_cols(const std::vector<Var>& xs);
Var gather_rows(const Var& x, std::vector<int64_t> idx);

// ---- reductions ----
Var sum_all(const Var& x);
Var mean_all(const Var& x);
Var row_mean(const Var& x);  // [T,C] -> [T,1]

// ---- linear algebra / nn primitives ----
Var matmul(const Var& a, const Var& b, bool trans_a = false, bool trans_b = false);
Var softmax_rows(const Var& x, int64_t valid_cols = -1);
Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-5);
Var dropout(const Var& x, double p, Rng& rng, bool training);

// x [T,Cin], w [Cout,Cin,K] -> [T_out,Cout]
Var conv1d(const Var& x, const Var& w, const Var& b, int64_t stride,
           int64_t pad, int64_t dilation = 1);
// x [T,Cin], w [Cin,Cout,K] -> [(T-1)*stride + K - 2*pad, Cout]
Var conv_transpose1d(const Var& x, const Var& w, const Var& b, int64_t stride,
                     int64_t pad);
// x [H,W,Cin], w [Cout,Kh,Kw,Cin] -> [H_out,W_out,Cout]
Var conv2d(const Var& x, const Var& w, const Var& b, int64_t stride_h,
           int64_t stride_w, int64_t pad_h, int64_t pad_w);
Var avg_pool_rows(const Var& x, int64_t k);  // [T,C] -> [T/k,C]

}  // namespace sfs::ad
