// tests/test_metrics.cpp
#include <doctest.h>

#include <cmath>

#include "gradcheck.h"
#include "sfs/metrics.h"

using namespace sfs;

namespace {

// naive double-loop references, independent of the library implementations
double naive_f0_rmse(const std::vector<double>& a, const std::vector<double>& b,
                     const std::vector<char>& va, const std::vector<char>& vb) {
  double s = 0.0;
  int n = 0;
  for (size_t i = 0; i < a.size(); ++i)
    if (va[i] && vb[i]) {
      s += (a[i] - b[i]) * (a[i] - b[i]);
      n++;
    }
  return std::sqrt(s / n);
}

double naive_mel_rmse(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  int64_t n = 0;
  for (int64_t r = 0; r < a.rows(); ++r)
    for (int64_t c = 0; c < a.cols(); ++c) {
      s += (a.at(r, c) - b.at(r, c)) * (a.at(r, c) - b.at(r, c));
      ++n;
    }
  return std::sqrt(s / static_cast<double>(n));
}

double naive_corr(const std::vector<double>& a, const std::vector<double>& b,
                  const std::vector<char>& va, const std::vector<char>& vb) {
  std::vector<double> xs, ys;
  for (size_t i = 0; i < a.size(); ++i)
    if (va[i] && vb[i]) {
      xs.push_back(a[i]);
      ys.push_back(b[i]);
    }
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("f0 rmse: identities and errors") {
  std::vector<double> f0 = {200, 210, 0, 230, 240};
  std::vector<char> v = {1, 1, 0, 1, 1};
  CHECK(metrics::f0_rmse(f0, f0, v, v) == doctest::Approx(0.0));

  std::vector<double> off = f0;
  for (double& x : off)
    if (x > 0) x += 10.0;
  CHECK(metrics::f0_rmse(f0, off, v, v) == doctest::Approx(10.0));

  std::vector<char> va = {1, 1, 0, 0, 0}, vb = {0, 0, 0, 1, 1};
  CHECK_THROWS_AS(metrics::f0_rmse(f0, f0, va, vb), NoVoicedOverlap);
}

TEST_CASE("mel rmse: identities") {
  Rng rng(1);
  Tensor m = test::random_tensor({20, 80}, rng);
  CHECK(metrics::mel_rmse(m, m) == doctest::Approx(0.0));

  Tensor off = m;
  for (double& v : off.data) v += 0.37;
  CHECK(metrics::mel_rmse(m, off) == doctest::Approx(0.37).epsilon(1e-12));

  Tensor other = test::random_tensor({19, 80}, rng);
  CHECK_THROWS_AS(metrics::mel_rmse(m, other), ShapeMismatch);
}

TEST_CASE("f0 corr: identities and degenerate variance") {
  std::vector<double> f0 = {200, 220, 260, 230, 240, 280};
  std::vector<char> v(6, 1);
  CHECK(metrics::f0_corr(f0, f0, v, v) == doctest::Approx(1.0));

  std::vector<double> neg;
  for (double x : f0) neg.push_back(-x + 500.0);
  CHECK(metrics::f0_corr(f0, neg, v, v) == doctest::Approx(-1.0));

  std::vector<double> flat(6, 220.0);
  CHECK_THROWS_AS(metrics::f0_corr(flat, f0, v, v), DegenerateVariance);
}

TEST_CASE("vuv error: identities") {
  std::vector<char> a = {1, 1, 0, 0, 1}, b = {0, 0, 1, 1, 0};
  CHECK(metrics::vuv_error_percent(a, a) == doctest::Approx(0.0));
  CHECK(metrics::vuv_error_percent(a, b) == doctest::Approx(100.0));

  std::vector<char> r(100, 1), s(100, 1);
  s[42] = 0;
  CHECK(metrics::vuv_error_percent(r, s) == doctest::Approx(1.0));
}

TEST_CASE("metrics equal naive references on random fixtures") {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const size_t n = static_cast<size_t>(rng.randint(8, 64));
    std::vector<double> a(n), b(n);
    std::vector<char> va(n), vb(n);
    for (size_t i = 0; i < n; ++i) {
      a[i] = rng.uniform(80.0, 1000.0);
      b[i] = rng.uniform(80.0, 1000.0);
      va[i] = rng.uniform() < 0.8;
      vb[i] = rng.uniform() < 0.8;
      if (!va[i]) a[i] = 0.0;
      if (!vb[i]) b[i] = 0.0;
    }
    // guarantee overlap and variance
    va[0] = vb[0] = va[1] = vb[1] = va[2] = vb[2] = 1;
    a[0] = 100;
    a[1] = 500;
    a[2] = 300;
    b[0] = 120;
    b[1] = 480;
    b[2] = 260;

    CHECK(metrics::f0_rmse(a, b, va, vb) ==
          doctest::Approx(naive_f0_rmse(a, b, va, vb)).epsilon(1e-9));
    CHECK(metrics::f0_corr(a, b, va, vb) ==
          doctest::Approx(naive_corr(a, b, va, vb)).epsilon(1e-9));

    Tensor ma = test::random_tensor({12, 8}, rng);
    Tensor mb = test::random_tensor({12, 8}, rng);
    CHECK(metrics::mel_rmse(ma, mb) ==
          doctest::Approx(naive_mel_rmse(ma, mb)).epsilon(1e-9));
  }
}
