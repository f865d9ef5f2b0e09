// src/autodiff.cpp
#include "sfs/autodiff.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace sfs::ad {

namespace {
thread_local bool g_grad_enabled = true;

void check(bool cond, const char* msg) {
  if (!cond) throw ShapeMismatch(msg);
}
}  // namespace

bool grad_enabled() { return g_grad_enabled; }
NoGradGuard::NoGradGuard() : prev(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev; }

Tensor& Node::ensure_grad() {
  if (!has_grad) {
    if (!grad.same_shape(value)) grad = Tensor(value.shape);
    grad.fill(0.0);
    has_grad = true;
  }
  return grad;
}

void Node::accum(const Tensor& g) {
  if (!requires_grad) return;
  ensure_grad();
  require(g.same_shape(grad), "gradient shape matches value shape");
  grad.add_(g);
}

Var Var::constant(Tensor v) {
  auto n = std::make_shared<Node>();
  n->value = std::move(v);
  return Var(std::move(n));
}

Var Var::leaf(Tensor v, bool requires_grad) {
  auto n = std::make_shared<Node>();
  n->value = std::move(v);
  n->requires_grad = requires_grad;
  return Var(std::move(n));
}

Var make_op(Tensor value, std::vector<Var> parents,
            std::function<void(Node&)> backfn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  if (g_grad_enabled) {
    bool need = false;
    for (const Var& p : parents) need = need || p.requires_grad();
    if (need) {
      n->requires_grad = true;
      n->parents.reserve(parents.size());
      for (Var& p : parents) n->parents.push_back(p.node());
      n->backfn = std::move(backfn);
    }
  }
  return Var(std::move(n));
}

void backward(const Var& loss) {
  require(loss.defined() && loss.val().numel() == 1,
          "backward() needs a defined scalar loss");
  // iterative post-order topo sort
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.push_back({loss.node().get(), 0});
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      Node* p = node->parents[idx++].get();
      if (p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  Node* root = loss.node().get();
  root->ensure_grad();
  root->grad.fill(1.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backfn && n->has_grad) n->backfn(*n);
  }
}

// ---------------------------------------------------------------- elementwise

Var add(const Var& a, const Var& b) {
  check(a.val().same_shape(b.val()), "add: shapes differ");
  Tensor out(a.val().shape);
  for (size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = a.val().data[i] + b.val().data[i];
  return make_op(std::move(out), {a, b}, [](Node& n) {
    n.parents[0]->accum(n.grad);
    n.parents[1]->accum(n.grad);
  });
}

Var sub(const Var& a, const Var& b) {
  check(a.val().same_shape(b.val()), "sub: shapes differ");
  Tensor out(a.val().shape);
  for (size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = a.val().data[i] - b.val().data[i];
  return make_op(std::move(out), {a, b}, [](Node& n) {
    n.parents[0]->accum(n.grad);
    if (n.parents[1]->requires_grad) {
      Tensor g(n.grad.shape);
      for (size_t i = 0; i < g.data.size(); ++i) g.data[i] = -n.grad.data[i];
      n.parents[1]->accum(g);
    }
  });
}

Var mul(const Var& a, const Var& b) {
  check(a.val().same_shape(b.val()), "mul: shapes differ");
  Tensor out(a.val().shape);
  for (size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = a.val().data[i] * b.val().data[i];
  return make_op(std::move(out), {a, b}, [](Node& n) {
    if (n.parents[0]->requires_grad) {
      Tensor g(n.grad.shape);
      for (size_t i = 0; i < g.data.size(); ++i)
        g.data[i] = n.grad.data[i] * n.parents[1]->value.data[i];
      n.parents[0]->accum(g);
    }
    if (n.parents[1]->requires_grad) {
      Tensor g(n.grad.shape);
      for (size_t i = 0; i < g.data.size(); ++i)
        g.data[i] = n.grad.data[i] * n.parents[0]->value.data[i];
      n.parents[1]->accum(g);
    }
  });
}

Var neg(const Var& a) { return smul(a, -1.0); }

Var sadd(const Var& a, double s) {
  Tensor out(a.val().shape);
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = a.val().data[i] + s;
  return make_op(std::move(out), {a},
                 [](Node& n) { n.parents[0]->accum(n.grad); });
}

Var smul(const Var& a, double s) {
  Tensor out(a.val().shape);
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = a.val().data[i] * s;
  return make_op(std::move(out), {a}, [s](Node& n) {
    if (!n.parents[0]->requires_grad) return;
    Tensor g(n.grad.shape);
    for (size_t i = 0; i < g.data.size(); ++i) g.data[i] = n.grad.data[i] * s;
    n.parents[0]->accum(g);
  });
}

namespace {

// unary op where the derivative is a function of input value x and output y
template <typename F, typename DF>
Var unary_op(const Var& a, F fwd, DF dfdx) {
  Tensor out(a.val().shape);
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = fwd(a.val().data[i]);
  return make_op(std::move(out), {a}, [dfdx](Node& n) {
    Node* p = n.parents[0].get();
    if (!p->requires_grad) return;
    Tensor g(n.grad.shape);
    for (size_t i = 0; i < g.data.size(); ++i)
      g.data[i] = n.grad.data[i] * dfdx(p->value.data[i], n.value.data[i]);
    p->accum(g);
  });
}

}  // namespace

Var relu(const Var& a) {
  return unary_op(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var leaky_relu(const Var& a, double slope) {
  return unary_op(
      a, [slope](double x) { return x > 0.0 ? x : slope * x; },
      [slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
}

Var gelu(const Var& a) {
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  constexpr double inv_sqrt2pi = 0.39894228040143267794;
  return unary_op(
      a,
      [](double x) { return 0.5 * x * (1.0 + std::erf(x * inv_sqrt2)); },
      [](double x, double) {
        const double cdf = 0.5 * (1.0 + std::erf(x * inv_sqrt2));
        return cdf + x * inv_sqrt2pi * std::exp(-0.5 * x * x);
      });
}

Var tanh_act(const Var& a) {
  return unary_op(
      a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(const Var& a) {
  return unary_op(
      a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Var exp_(const Var& a) {
  return unary_op(
      a, [](double x) { return std::exp(x); },
      [](double, double y) { return y; });
}

Var log_(const Var& a) {
  return unary_op(
      a, [](double x) { return std::log(x); },
      [](double x, double) { return 1.0 / x; });
}

Var sqrt_(const Var& a) {
  return unary_op(
      a, [](double x) { return std::sqrt(x); },
      [](double, double y) { return 0.5 / y; });
}

Var recip(const Var& a) {
  return unary_op(
      a, [](double x) { return 1.0 / x; },
      [](double, double y) { return -y * y; });
}

Var abs_(const Var& a) {
  return unary_op(
      a, [](double x) { return std::fabs(x); },
      [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Var square(const Var& a) {
  return unary_op(
      a, [](double x) { return x * x; },
      [](double x, double) { return 2.0 * x; });
}

// ----------------------------------------------------------------- broadcast

Var add_rowvec(const Var& x, const Var& b) {
  const int64_t T = x.val().rows(), C = x.val().cols();
  check(b.val().numel() == C, "add_rowvec: bias length");
  Tensor out(x.val().shape);
  for (int64_t t = 0; t < T; ++t)
    for (int64_t c = 0; c < C; ++c)
      out.data[t * C + c] = x.val().data[t * C + c] + b.val().data[c];
  return make_op(std::move(out), {x, b}, [T, C](Node& n) {
    n.parents[0]->accum(n.grad);
    if (n.parents[1]->requires_grad) {
      Tensor g(n.parents[1]->value.shape);
      for (int64_t t = 0; t < T; ++t)
        for (int64_t c = 0; c < C; ++c) g.data[c] += n.grad.data[t * C + c];
      n.parents[1]->accum(g);
    }
  });
}

Var mul_rowvec(const Var& x, const Var& b) {
  const int64_t T = x.val().rows(), C = x.val().cols();
  check(b.val().numel() == C, "mul_rowvec: vector length");
  Tensor out(x.val().shape);
  for (int64_t t = 0; t < T; ++t)
    for (int64_t c = 0; c < C; ++c)
      out.data[t * C + c] = x.val().data[t * C + c] * b.val().data[c];
  return make_op(std::move(out), {x, b}, [T, C](Node& n) {
    if (n.parents[0]->requires_grad) {
      Tensor g(n.grad.shape);
      for (int64_t t = 0; t < T; ++t)
        for (int64_t c = 0; c < C; ++c)
          g.data[t * C + c] = n.grad.data[t * C + c] * n.parents[1]->value.data[c];
      n.parents[0]->accum(g);
    }
    if (n.parents[1]->requires_grad) {
      Tensor g(n.parents[1]->value.shape);
      for (int64_t t = 0; t < T; ++t)
        for (int64_t c = 0; c < C; ++c)
          g.data[c] += n.grad.data[t * C + c] * n.parents[0]->value.data[t * C + c];
      n.parents[1]->accum(g);
    }
  });
}

Var sub_colvec(const Var& x, const Var& c) {
  const int64_t T = x.val().rows(), C = x.val().cols();
  check(c.val().rows() == T && c.val().cols() == 1, "sub_colvec: shape");
  Tensor out(x.val().shape);
  for (int64_t t = 0; t < T; ++t)
    for (int64_t j = 0; j < C; ++j)
      out.data[t * C + j] = x.val().data[t * C + j] - c.val().data[t];
  return make_op(std::move(out), {x, c}, [T, C](Node& n) {
    n.parents[0]->accum(n.grad);
    if (n.parents[1]->requires_grad) {
      Tensor g({T, 1});
      for (int64_t t = 0; t < T; ++t)
        for (int64_t j = 0; j < C; ++j) g.data[t] -= n.grad.data[t * C + j];
      n.parents[1]->accum(g);
    }
  });
}

Var mul_colvec(const Var& x, const Var& c) {
  const int64_t T = x.val().rows(), C = x.val().cols();
  check(c.val().rows() == T && c.val().cols() == 1, "mul_colvec: shape");
  Tensor out(x.val().shape);
  for (int64_t t = 0; t < T; ++t)
    for (int64_t j = 0; j < C; ++j)
      out.data[t * C + j] = x.val().data[t * C + j] * c.val().data[t];
  return make_op(std::move(out), {x, c}, [T, C](Node& n) {
    if (n.parents[0]->requires_grad) {
      Tensor g(n.grad.shape);
      for (int64_t t = 0; t < T; ++t)
        for (int64_t j = 0; j < C; ++j)
          g.data[t * C + j] = n.grad.data[t * C + j] * n.parents[1]->value.data[t];
      n.parents[0]->accum(g);
    }
    if (n.parents[1]->requires_grad) {
      Tensor g({T, 1});
      for (int64_t t = 0; t < T; ++t)
        for (int64_t j = 0; j < C; ++j)
          g.data[t] += n.grad.data[t * C + j] * n.parents[0]->value.data[t * C + j];
      n.parents[1]->accum(g);
    }
  });
}

// --------------------------------------------------------------------- shape

Var reshape(const Var& x, std::vector<int64_t> shape) {
  check(Tensor::numel_of(shape) == x.val().numel(), "reshape: numel");
  Tensor out(std::move(shape), x.val().data);
  return make_op(std::move(out), {x}, [](Node& n) {
    if (!n.parents[0]->requires_grad) return;
    Tensor g(n.parents[0]->value.shape, n.grad.data);
    n.parents[0]->accum(g);
  });
}

Var slice_rows(const Var& x, int64_t r0, int64_t r1) {
  const int64_t T = x.val().rows(), C = x.val().cols();
  check(0 <= r0 && r0 <= r1 && r1 <= T, "slice_rows: range");
  std::vector<int64_t> shape = x.val().shape;
  shape[0] = r1 - r0;
  Tensor out(shape);
  std::copy(x.val().data.begin() + r0 * C, x.val().data.begin() + r1 * C,
            out.data.begin());
  return make_op(std::move(out), {x}, [r0, C](Node& n) {
    Node* p = n.parents[0].get();
    if (!p->requires_grad) return;
    Tensor& g = p->ensure_grad();
    const int64_t rows = n.grad.rows();
    for (int64_t i = 0; i < rows * C; ++i) g.data[r0 * C + i] += n.grad.data[i];
  });
}

Var slice_cols(const Var& x, int64_t c0, int64_t c1) {
  const int64_t T = x.val().rows(), C = x.val().cols();
  check(0 <= c0 && c0 <= c1 && c1 <= C, "slice_cols: range");
  Tensor out({T, c1 - c0});
  for (int64_t t = 0; t < T; ++t)
    for (int64_t c = c0; c < c1; ++c)
      out.data[t * (c1 - c0) + (c - c0)] = x.val().data[t * C + c];
  return make_op(std::move(out), {x}, [c0, c1, C, T](Node& n) {
    Node* p = n.parents[0].get();
    if (!p->requires_grad) return;
    Tensor& g = p->ensure_grad();
    const int64_t W = c1 - c0;
    for (int64_t t = 0; t < T; ++t)
      for (int64_t c = 0; c < W; ++c)
        g.data[t * C + c0 + c] += n.grad.data[t * W + c];
  });
}

Var concat_rows(const std::vector<Var>& xs) {
  require(!xs.empty(), "concat_rows: non-empty");
  const int64_t C = xs[0].val().cols();
  int64_t T = 0;
  for (const Var& x : xs) {
    check(x.val().cols() == C, "concat_rows: column mismatch");
    T += x.val().rows();
  }
  Tensor out({T, C});
  int64_t at = 0;
  for (const Var& x : xs) {
    std::copy(x.val().data.begin(), x.val().data.end(), out.data.begin() + at);
    at += x.val().numel();
  }
  return make_op(std::move(out), xs, [](Node& n) {
    int64_t at = 0;
    for (auto& p : n.parents) {
      const int64_t len = p->value.numel();
      if (p->requires_grad) {
        Tensor g(p->value.shape);
        std::copy(n.grad.data.begin() + at, n.grad.data.begin() + at + len,
                  g.data.begin());
        p->accum(g);
      }
      at += len;
    }
  });
}

Var concat_cols(const std::vector<Var>& xs) {
  require(!xs.empty(), "concat_cols: non-empty");
  const int64_t T = xs[0].val().rows();
  int64_t C = 0;
  for (const Var& x : xs) {
    check(x.val().rows() == T, "concat_cols: row mismatch");
    C += x.val().cols();
  }
  Tensor out({T, C});
  int64_t off = 0;
  for (const Var& x : xs) {
    const int64_t w = x.val().cols();
    for (int64_t t = 0; t < T; ++t)
      for (int64_t c = 0; c < w; ++c)
        out.data[t * C + off + c] = x.val().data[t * w + c];
    off += w;
  }
  return make_op(std::move(out), xs, [T, C](Node& n) {
    int64_t off = 0;
    for (auto& p : n.parents) {
      const int64_t w = p->value.cols();
      if (p->requires_grad) {
        Tensor g(p->value.shape);
        for (int64_t t = 0; t < T; ++t)
          for (int64_t c = 0; c < w; ++c)
            g.data[t * w + c] = n.grad.data[t * C + off + c];
        p->accum(g);
      }
      off += w;
    }
  });
}

Var gather_rows(const Var& x, std::vector<int64_t> idx) {
  const int64_t T = x.val().rows(), C = x.val().cols();
  for (int64_t i : idx) check(0 <= i && i < T, "gather_rows: index range");
  Tensor out({static_cast<int64_t>(idx.size()), C});
  for (size_t r = 0; r < idx.size(); ++r)
    std::copy(x.val().data.begin() + idx[r] * C,
              x.val().data.begin() + (idx[r] + 1) * C, out.data.begin() + r * C);
  return make_op(std::move(out), {x}, [idx = std::move(idx), C](Node& n) {
    Node* p = n.parents[0].get();
    if (!p->requires_grad) return;
    Tensor& g = p->ensure_grad();
    for (size_t r = 0; r < idx.size(); ++r)
      for (int64_t c = 0; c < C; ++c)
        g.data[idx[r] * C + c] += n.grad.data[r * C + c];
  });
}

// ---------------------------------------------------------------- reductions

Var sum_all(const Var& x) {
  double s = 0.0;
  for (double v : x.val().data) s += v;
  return make_op(Tensor::scalar(s), {x}, [](Node& n) {
    Node* p = n.parents[0].get();
    if (!p->requires_grad) return;
    Tensor g(p->value.shape);
    g.fill(n.grad.data[0]);
    p->accum(g);
  });
}

Var mean_all(const Var& x) {
  return smul(sum_all(x), 1.0 / static_cast<double>(x.val().numel()));
}

Var row_mean(const Var& x) {
  const int64_t T = x.val().rows(), C = x.val().cols();
  Tensor out({T, 1});
  for (int64_t t = 0; t < T; ++t) {
    double s = 0.0;
    for (int64_t c = 0; c < C; ++c) s += x.val().data[t * C + c];
    out.data[t] = s / static_cast<double>(C);
  }
  return make_op(std::move(out), {x}, [T, C](Node& n) {
    Node* p = n.parents[0].get();
    if (!p->requires_grad) return;
    Tensor g({T, C});
    for (int64_t t = 0; t < T; ++t)
      for (int64_t c = 0; c < C; ++c)
        g.data[t * C + c] = n.grad.data[t] / static_cast<double>(C);
    p->accum(g);
  });
}

// ------------------------------------------------------------- linear algebra

Var matmul(const Var& a, const Var& b, bool trans_a, bool trans_b) {
  const int64_t am = trans_a ? a.val().cols() : a.val().rows();
  const int64_t ak = trans_a ? a.val().rows() : a.val().cols();
  const int64_t bk = trans_b ? b.val().cols() : b.val().rows();
  const int64_t bn = trans_b ? b.val().rows() : b.val().cols();
  check(ak == bk, "matmul: inner dims");
  Tensor out({am, bn});
  gemm(trans_a, trans_b, am, bn, ak, 1.0, a.val().ptr(), a.val().cols(),
       b.val().ptr(), b.val().cols(), 0.0, out.ptr(), bn);
  return make_op(std::move(out), {a, b}, [trans_a, trans_b, am, bn, ak](Node& n) {
    Node* pa = n.parents[0].get();
    Node* pb = n.parents[1].get();
    const Tensor& A = pa->value;
    const Tensor& B = pb->value;
    const Tensor& G = n.grad;
    if (pa->requires_grad) {
      Tensor& ga = pa->ensure_grad();
      // dA = G B^T (or transposed variants)
      if (!trans_a)
        gemm(false, !trans_b, am, ak, bn, 1.0, G.ptr(), bn, B.ptr(), B.cols(),
             1.0, ga.ptr(), ga.cols());
      else
        gemm(trans_b, true, ak, am, bn, 1.0, B.ptr(), B.cols(), G.ptr(), bn,
             1.0, ga.ptr(), ga.cols());
    }
    if (pb->requires_grad) {
      Tensor& gb = pb->ensure_grad();
      if (!trans_b)
        gemm(!trans_a, false, ak, bn, am, 1.0, A.ptr(), A.cols(), G.ptr(), bn,
             1.0, gb.ptr(), gb.cols());
      else
        gemm(true, trans_a, bn, ak, am, 1.0, G.ptr(), bn, A.ptr(), A.cols(),
             1.0, gb.ptr(), gb.cols());
    }
  });
}

Var softmax_rows(const Var& x, int64_t valid_cols) {
  const int64_t T = x.val().rows(), C = x.val().cols();
  const int64_t V = valid_cols < 0 ? C : valid_cols;
  check(V >= 1 && V <= C, "softmax_rows: valid_cols");
  Tensor out({T, C});
  for (int64_t t = 0; t < T; ++t) {
    double mx = -1e300;
    for (int64_t c = 0; c < V; ++c) mx = std::max(mx, x.val().data[t * C + c]);
    double z = 0.0;
    for (int64_t c = 0; c < V; ++c) {
      const double e = std::exp(x.val().data[t * C + c] - mx);
      out.data[t * C + c] = e;
      z += e;
    }
    for (int64_t c = 0; c < V; ++c) out.data[t * C + c] /= z;
    for (int64_t c = V; c < C; ++c) out.data[t * C + c] = 0.0;
  }
  return make_op(std::move(out), {x}, [T, C, V](Node& n) {
    Node* p = n.parents[0].get();
    if (!p->requires_grad) return;
    Tensor g({T, C});
    for (int64_t t = 0; t < T; ++t) {
      double dot = 0.0;
      for (int64_t c = 0; c < V; ++c)
        dot += n.grad.data[t * C + c] * n.value.data[t * C + c];
      for (int64_t c = 0; c < V; ++c)
        g.data[t * C + c] =
            n.value.data[t * C + c] * (n.grad.data[t * C + c] - dot);
    }
    p->accum(g);
  });
}

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps) {
  const int64_t T = x.val().rows(), C = x.val().cols();
  check(gamma.val().numel() == C && beta.val().numel() == C, "layer_norm: params");
  Tensor out({T, C});
  Tensor xhat({T, C});
  Tensor inv_std({T, 1});
  for (int64_t t = 0; t < T; ++t) {
    double mu = 0.0;
    for (int64_t c = 0; c < C; ++c) mu += x.val().data[t * C + c];
    mu /= static_cast<double>(C);
    double var = 0.0;
    for (int64_t c = 0; c < C; ++c) {
      const double d = x.val().data[t * C + c] - mu;
      var += d * d;
    }
    var /= static_cast<double>(C);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std.data[t] = is;
    for (int64_t c = 0; c < C; ++c) {
      const double h = (x.val().data[t * C + c] - mu) * is;
      xhat.data[t * C + c] = h;
      out.data[t * C + c] = h * gamma.val().data[c] + beta.val().data[c];
    }
  }
  auto xhat_p = std::make_shared<Tensor>(std::move(xhat));
  auto istd_p = std::make_shared<Tensor>(std::move(inv_std));
  return make_op(std::move(out), {x, gamma, beta},
                 [T, C, xhat_p, istd_p](Node& n) {
    Node* px = n.parents[0].get();
    Node* pg = n.parents[1].get();
    Node* pb = n.parents[2].get();
    if (pg->requires_grad) {
      Tensor g(pg->value.shape);
      for (int64_t t = 0; t < T; ++t)
        for (int64_t c = 0; c < C; ++c)
          g.data[c] += n.grad.data[t * C + c] * xhat_p->data[t * C + c];
      pg->accum(g);
    }
    if (pb->requires_grad) {
      Tensor g(pb->value.shape);
      for (int64_t t = 0; t < T; ++t)
        for (int64_t c = 0; c < C; ++c) g.data[c] += n.grad.data[t * C + c];
      pb->accum(g);
    }
    if (px->requires_grad) {
      Tensor g({T, C});
      for (int64_t t = 0; t < T; ++t) {
        double mean_dy = 0.0, mean_dyx = 0.0;
        for (int64_t c = 0; c < C; ++c) {
          const double dy = n.grad.data[t * C + c] * pg->value.data[c];
          mean_dy += dy;
          mean_dyx += dy * xhat_p->data[t * C + c];
        }
        mean_dy /= static_cast<double>(C);
        mean_dyx /= static_cast<double>(C);
        for (int64_t c = 0; c < C; ++c) {
          const double dy = n.grad.data[t * C + c] * pg->value.data[c];
          g.data[t * C + c] =
              istd_p->data[t] *
              (dy - mean_dy - xhat_p->data[t * C + c] * mean_dyx);
        }
      }
      px->accum(g);
    }
  });
}

Var dropout(const Var& x, double p, Rng& rng, bool training) {
  if (!training || p <= 0.0) return x;
  const double keep = 1.0 - p;
  Tensor mask(x.val().shape);
  for (double& m : mask.data) m = (rng.uniform() < keep) ? 1.0 / keep : 0.0;
  return mul(x, Var::constant(std::move(mask)));
}

// -------------------------------------------------------------- convolutions

namespace {

// im2col for 1-D conv: out [T_out, Cin*K]
void im2col1d(const Tensor& x, int64_t t_out, int64_t k, int64_t stride,
              int64_t pad, int64_t dil, Tensor& col) {
  const int64_t T = x.rows(), C = x.cols();
  for (int64_t t = 0; t < t_out; ++t) {
    double* dst = col.ptr() + t * C * k;
    for (int64_t ci = 0; ci < C; ++ci) {
      for (int64_t kk = 0; kk < k; ++kk) {
        const int64_t src = t * stride + kk * dil - pad;
        dst[ci * k + kk] =
            (src >= 0 && src < T) ? x.data[src * C + ci] : 0.0;
      }
    }
  }
}

}  // namespace

Var conv1d(const Var& x, const Var& w, const Var& b, int64_t stride,
           int64_t pad, int64_t dilation) {
  const Tensor& xv = x.val();
  const Tensor& wv = w.val();
  check(wv.ndim() == 3, "conv1d: weight rank");
  const int64_t T = xv.rows(), Cin = xv.cols();
  const int64_t Cout = wv.dim(0), K = wv.dim(2);
  check(wv.dim(1) == Cin, "conv1d: channel mismatch");
  const int64_t span = dilation * (K - 1) + 1;
  const int64_t t_out = (T + 2 * pad - span) / stride + 1;
  check(t_out >= 1, "conv1d: output length");

  Tensor col({t_out, Cin * K});
  im2col1d(xv, t_out, K, stride, pad, dilation, col);
  Tensor out({t_out, Cout});
  gemm(false, true, t_out, Cout, Cin * K, 1.0, col.ptr(), Cin * K, wv.ptr(),
       Cin * K, 0.0, out.ptr(), Cout);
  if (b.defined()) {
    check(b.val().numel() == Cout, "conv1d: bias length");
    for (int64_t t = 0; t < t_out; ++t)
      for (int64_t c = 0; c < Cout; ++c) out.data[t * Cout + c] += b.val().data[c];
  }
  std::vector<Var> parents = {x, w};
  if (b.defined()) parents.push_back(b);
  return make_op(std::move(out), std::move(parents),
                 [stride, pad, dilation, T, Cin, Cout, K, t_out](Node& n) {
    Node* px = n.parents[0].get();
    Node* pw = n.parents[1].get();
    Node* pb = n.parents.size() > 2 ? n.parents[2].get() : nullptr;
    const Tensor& G = n.grad;
    if (pb && pb->requires_grad) {
      Tensor g(pb->value.shape);
      for (int64_t t = 0; t < t_out; ++t)
        for (int64_t c = 0; c < Cout; ++c) g.data[c] += G.data[t * Cout + c];
      pb->accum(g);
    }
    if (pw->requires_grad) {
      Tensor col({t_out, Cin * K});
      im2col1d(px->value, t_out, K, stride, pad, dilation, col);
      Tensor& gw = pw->ensure_grad();
      // dW [Cout, Cin*K] += G^T [Cout, t_out] x col [t_out, Cin*K]
      gemm(true, false, Cout, Cin * K, t_out, 1.0, G.ptr(), Cout, col.ptr(),
           Cin * K, 1.0, gw.ptr(), Cin * K);
    }
    if (px->requires_grad) {
      Tensor gcol({t_out, Cin * K});
      gemm(false, false, t_out, Cin * K, Cout, 1.0, G.ptr(), Cout,
           pw->value.ptr(), Cin * K, 0.0, gcol.ptr(), Cin * K);
      Tensor& gx = px->ensure_grad();
      for (int64_t t = 0; t < t_out; ++t) {
        const double* src = gcol.ptr() + t * Cin * K;
        for (int64_t ci = 0; ci < Cin; ++ci)
          for (int64_t kk = 0; kk < K; ++kk) {
            const int64_t dst = t * stride + kk * dilation - pad;
            if (dst >= 0 && dst < T) gx.data[dst * Cin + ci] += src[ci * K + kk];
          }
      }
    }
  });
}

Var conv_transpose1d(const Var& x, const Var& w, const Var& b, int64_t stride,
                     int64_t pad) {
  const Tensor& xv = x.val();
  const Tensor& wv = w.val();
  check(wv.ndim() == 3, "conv_transpose1d: weight rank");
  const int64_t T = xv.rows(), Cin = xv.cols();
  check(wv.dim(0) == Cin, "conv_transpose1d: channel mismatch");
  const int64_t Cout = wv.dim(1), K = wv.dim(2);
  const int64_t t_out = (T - 1) * stride + K - 2 * pad;
  check(t_out >= 1, "conv_transpose1d: output length");

  // Z [T, Cout*K] = x [T,Cin] @ w [Cin, Cout*K]; scatter into output
  Tensor z({T, Cout * K});
  gemm(false, false, T, Cout * K, Cin, 1.0, xv.ptr(), Cin, wv.ptr(), Cout * K,
       0.0, z.ptr(), Cout * K);
  Tensor out({t_out, Cout});
  for (int64_t t = 0; t < T; ++t)
    for (int64_t co = 0; co < Cout; ++co)
      for (int64_t k = 0; k < K; ++k) {
        const int64_t dst = t * stride + k - pad;
        if (dst >= 0 && dst < t_out)
          out.data[dst * Cout + co] += z.data[t * (Cout * K) + co * K + k];
      }
  if (b.defined()) {
    check(b.val().numel() == Cout, "conv_transpose1d: bias length");
    for (int64_t t = 0; t < t_out; ++t)
      for (int64_t c = 0; c < Cout; ++c) out.data[t * Cout + c] += b.val().data[c];
  }
  std::vector<Var> parents = {x, w};
  if (b.defined()) parents.push_back(b);
  return make_op(std::move(out), std::move(parents),
                 [stride, pad, T, Cin, Cout, K, t_out](Node& n) {
    Node* px = n.parents[0].get();
    Node* pw = n.parents[1].get();
    Node* pb = n.parents.size() > 2 ? n.parents[2].get() : nullptr;
    const Tensor& G = n.grad;
    if (pb && pb->requires_grad) {
      Tensor g(pb->value.shape);
      for (int64_t t = 0; t < t_out; ++t)
        for (int64_t c = 0; c < Cout; ++c) g.data[c] += G.data[t * Cout + c];
      pb->accum(g);
    }
    // dZ[t, co*K+k] = G[t*stride+k-pad, co]
    Tensor gz({T, Cout * K});
    for (int64_t t = 0; t < T; ++t)
      for (int64_t co = 0; co < Cout; ++co)
        for (int64_t k = 0; k < K; ++k) {
          const int64_t src = t * stride + k - pad;
          gz.data[t * (Cout * K) + co * K + k] =
              (src >= 0 && src < t_out) ? G.data[src * Cout + co] : 0.0;
        }
    if (px->requires_grad) {
      Tensor& gx = px->ensure_grad();
      gemm(false, true, T, Cin, Cout * K, 1.0, gz.ptr(), Cout * K,
           pw->value.ptr(), Cout * K, 1.0, gx.ptr(), Cin);
    }
    if (pw->requires_grad) {
      Tensor& gw = pw->ensure_grad();
      gemm(true, false, Cin, Cout * K, T, 1.0, px->value.ptr(), Cin, gz.ptr(),
           Cout * K, 1.0, gw.ptr(), Cout * K);
    }
  });
}

namespace {

void im2col2d(const Tensor& x, int64_t h_out, int64_t w_out, int64_t kh,
              int64_t kw, int64_t sh, int64_t sw, int64_t ph, int64_t pw_,
              Tensor& col) {
  const int64_t H = x.dim(0), W = x.dim(1), C = x.dim(2);
  const int64_t patch = kh * kw * C;
  for (int64_t i = 0; i < h_out; ++i)
    for (int64_t j = 0; j < w_out; ++j) {
      double* dst = col.ptr() + (i * w_out + j) * patch;
      for (int64_t a = 0; a < kh; ++a)
        for (int64_t b = 0; b < kw; ++b) {
          const int64_t si = i * sh + a - ph;
          const int64_t sj = j * sw + b - pw_;
          double* d = dst + (a * kw + b) * C;
          if (si >= 0 && si < H && sj >= 0 && sj < W) {
            const double* s = x.ptr() + (si * W + sj) * C;
            std::copy(s, s + C, d);
          } else {
            std::fill(d, d + C, 0.0);
          }
        }
    }
}

}  // namespace

Var conv2d(const Var& x, const Var& w, const Var& b, int64_t stride_h,
           int64_t stride_w, int64_t pad_h, int64_t pad_w) {
  const Tensor& xv = x.val();
  const Tensor& wv = w.val();
  check(xv.ndim() == 3 && wv.ndim() == 4, "conv2d: ranks");
  const int64_t H = xv.dim(0), W = xv.dim(1), Cin = xv.dim(2);
  const int64_t Cout = wv.dim(0), Kh = wv.dim(1), Kw = wv.dim(2);
  check(wv.dim(3) == Cin, "conv2d: channel mismatch");
  const int64_t h_out = (H + 2 * pad_h - Kh) / stride_h + 1;
  const int64_t w_out = (W + 2 * pad_w - Kw) / stride_w + 1;
  check(h_out >= 1 && w_out >= 1, "conv2d: output size");
  const int64_t patch = Kh * Kw * Cin;

  Tensor col({h_out * w_out, patch});
  im2col2d(xv, h_out, w_out, Kh, Kw, stride_h, stride_w, pad_h, pad_w, col);
  Tensor out({h_out, w_out, Cout});
  gemm(false, true, h_out * w_out, Cout, patch, 1.0, col.ptr(), patch, wv.ptr(),
       patch, 0.0, out.ptr(), Cout);
  if (b.defined()) {
    check(b.val().numel() == Cout, "conv2d: bias length");
    for (int64_t t = 0; t < h_out * w_out; ++t)
      for (int64_t c = 0; c < Cout; ++c) out.data[t * Cout + c] += b.val().data[c];
  }
  std::vector<Var> parents = {x, w};
  if (b.defined()) parents.push_back(b);
  return make_op(std::move(out), std::move(parents),
                 [=](Node& n) {
    Node* px = n.parents[0].get();
    Node* pw = n.parents[1].get();
    Node* pb = n.parents.size() > 2 ? n.parents[2].get() : nullptr;
    const Tensor& G = n.grad;  // [h_out, w_out, Cout]
    const int64_t rows = h_out * w_out;
    if (pb && pb->requires_grad) {
      Tensor g(pb->value.shape);
      for (int64_t t = 0; t < rows; ++t)
        for (int64_t c = 0; c < Cout; ++c) g.data[c] += G.data[t * Cout + c];
      pb->accum(g);
    }
    if (pw->requires_grad) {
      Tensor col({rows, patch});
      im2col2d(px->value, h_out, w_out, Kh, Kw, stride_h, stride_w, pad_h,
               pad_w, col);
      Tensor& gw = pw->ensure_grad();
      gemm(true, false, Cout, patch, rows, 1.0, G.ptr(), Cout, col.ptr(), patch,
           1.0, gw.ptr(), patch);
    }
    if (px->requires_grad) {
      Tensor gcol({rows, patch});
      gemm(false, false, rows, patch, Cout, 1.0, G.ptr(), Cout, pw->value.ptr(),
           patch, 0.0, gcol.ptr(), patch);
      Tensor& gx = px->ensure_grad();
      for (int64_t i = 0; i < h_out; ++i)
        for (int64_t j = 0; j < w_out; ++j) {
          const double* src = gcol.ptr() + (i * w_out + j) * patch;
          for (int64_t a = 0; a < Kh; ++a)
            for (int64_t bb = 0; bb < Kw; ++bb) {
              const int64_t si = i * stride_h + a - pad_h;
              const int64_t sj = j * stride_w + bb - pad_w;
              if (si >= 0 && si < H && sj >= 0 && sj < W) {
                double* d = gx.ptr() + (si * W + sj) * Cin;
                const double* s = src + (a * Kw + bb) * Cin;
                for (int64_t c = 0; c < Cin; ++c) d[c] += s[c];
              }
            }
        }
    }
  });
}

Var avg_pool_rows(const Var& x, int64_t k) {
  const int64_t T = x.val().rows(), C = x.val().cols();
  check(k >= 1 && T % k == 0, "avg_pool_rows: divisibility");
  const int64_t t_out = T / k;
  Tensor out({t_out, C});
  for (int64_t t = 0; t < t_out; ++t)
    for (int64_t j = 0; j < k; ++j)
      for (int64_t c = 0; c < C; ++c)
        out.data[t * C + c] += x.val().data[(t * k + j) * C + c];
  out.scale_(1.0 / static_cast<double>(k));
  return make_op(std::move(out), {x}, [k, t_out, C](Node& n) {
    Node* p = n.parents[0].get();
    if (!p->requires_grad) return;
    Tensor g(p->value.shape);
    const double inv = 1.0 / static_cast<double>(k);
    for (int64_t t = 0; t < t_out; ++t)
      for (int64_t j = 0; j < k; ++j)
        for (int64_t c = 0; c < C; ++c)
          g.data[(t * k + j) * C + c] = n.grad.data[t * C + c] * inv;
    p->accum(g);
  });
}

}  // namespace sfs::ad
