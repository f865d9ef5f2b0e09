// tests/gradcheck.h -- central finite-difference gradient checking.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "sfs/autodiff.h"

namespace sfs::test {

inline double rel_err(double a, double b) {
  const double denom = std::max({1e-12, std::fabs(a), std::fabs(b)});
  return std::fabs(a - b) / denom;
}

struct GradCheckResult {
  double max_rel_err = 0.0;
  int64_t worst_coord = -1;
  double analytic = 0.0, numeric = 0.0;
  bool ok(double tol) const { return max_rel_err <= tol; }
};

// Compares the analytic gradient of scalar-valued f at the given coordinates
// of x0 against central finite differences. Gradients below abs_floor on both
// sides are treated as matching (avoids 0-vs-1e-15 blowups).
inline GradCheckResult check_gradient(
    const std::function<ad::Var(const ad::Var&)>& f, const Tensor& x0,
    const std::vector<int64_t>& coords, double h = 1e-4,
    double abs_floor = 1e-9) {
  ad::Var x = ad::Var::leaf(x0, true);
  ad::Var y = f(x);
  ad::backward(y);
  GradCheckResult res;
  for (int64_t c : coords) {
    Tensor xp = x0, xm = x0;
    xp.data[static_cast<size_t>(c)] += h;
    xm.data[static_cast<size_t>(c)] -= h;
    double fp, fm;
    {
      ad::NoGradGuard ng;
      fp = f(ad::Var::constant(xp)).item();
      fm = f(ad::Var::constant(xm)).item();
    }
    const double num = (fp - fm) / (2.0 * h);
    const double ana = x.has_grad() ? x.grad().data[static_cast<size_t>(c)] : 0.0;
    if (std::fabs(num) < abs_floor && std::fabs(ana) < abs_floor) continue;
    const double e = rel_err(ana, num);
    if (e > res.max_rel_err) {
      res.max_rel_err = e;
      res.worst_coord = c;
      res.analytic = ana;
      res.numeric = num;
    }
  }
  return res;
}

inline std::vector<int64_t> all_coords(const Tensor& t) {
  std::vector<int64_t> c(static_cast<size_t>(t.numel()));
  for (size_t i = 0; i < c.size(); ++i) c[i] = static_cast<int64_t>(i);
  return c;
}

inline std::vector<int64_t> sample_coords(const Tensor& t, int64_t n, Rng& rng) {
  std::vector<int64_t> c;
  for (int64_t i = 0; i < n; ++i) c.push_back(rng.randint(0, t.numel() - 1));
  return c;
}

inline Tensor random_tensor(std::vector<int64_t> shape, Rng& rng,
                            double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

}  // namespace sfs::test
