#pragma once

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "distmin/opt/diff_function.hpp"
#include "support/random.hpp"

namespace distmin::testing {

using opt::DistVector;
using opt::Evaluation;

using Matrix = std::vector<std::vector<double>>;

inline std::vector<double> mat_vec(const Matrix& a, const std::vector<double>& x) {
  std::vector<double> y(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) y[i] += a[i][j] * x[j];
  }
  return y;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// Q^T diag(eig) Q for a random orthogonal Q (Gram-Schmidt on Gaussian columns).
inline Matrix random_spd(std::mt19937_64& rng, std::size_t d, double lo, double hi) {
  std::normal_distribution<double> n01;
  Matrix q(d, std::vector<double>(d));
  for (auto& row : q) {
    for (auto& v : row) v = n01(rng);
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < i; ++k) {
      const double p = dot(q[i], q[k]);
      for (std::size_t j = 0; j < d; ++j) q[i][j] -= p * q[k][j];
    }
    const double nn = norm2(q[i]);
    for (auto& v : q[i]) v /= nn;
  }
  std::uniform_real_distribution<double> eig(lo, hi);
  std::vector<double> lambda(d);
  for (auto& l : lambda) l = eig(rng);
  Matrix a(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t k = 0; k < d; ++k) a[i][j] += q[k][i] * lambda[k] * q[k][j];
    }
  }
  return a;
}

inline std::vector<double> as_double(const std::vector<Scalar>& v) { return {v.begin(), v.end()}; }

inline DistVector distribute(const std::vector<double>& v, std::size_t block_size) {
  std::vector<Scalar> s(v.begin(), v.end());
  return DistVector::from_dense(s, block_size);
}

// f(x) = 1/2 x^T A x - b^T x, evaluated densely.
class Quadratic : public opt::DiffFunction {
 public:
  Quadratic(Matrix a, std::vector<double> b) : a_(std::move(a)), b_(std::move(b)) {}

  Evaluation compute(const DistVector& x) override {
    ++evaluations;
    const auto xd = as_double(x.to_dense());
    const auto ax = mat_vec(a_, xd);
    std::vector<double> g(xd.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = ax[i] - b_[i];
    return {static_cast<Scalar>(0.5 * dot(xd, ax) - dot(b_, xd)), distribute(g, x.block_size())};
  }

  const Matrix& a() const { return a_; }
  const std::vector<double>& b() const { return b_; }
  std::size_t evaluations = 0;

 private:
  Matrix a_;
  std::vector<double> b_;
};

// 1/2 sum a_i (x_i - c_i)^2 with distributed arithmetic only.
class Separable : public opt::DiffFunction {
 public:
  Separable(std::vector<double> a, std::vector<double> c, std::size_t block_size)
      : a_(distribute(a, block_size)), c_(distribute(c, block_size)) {}

  Evaluation compute(const DistVector& x) override {
    const DistVector r = x - c_;
    const DistVector g = a_ * r;
    return {static_cast<Scalar>(0.5) * r.dot(g), g};
  }

 private:
  DistVector a_;
  DistVector c_;
};

class Rosenbrock : public opt::DiffFunction {
 public:
  Evaluation compute(const DistVector& x) override {
    const auto v = x.to_dense();
    const double a = v[0], b = v[1];
    const double f = (1 - a) * (1 - a) + 100 * (b - a * a) * (b - a * a);
    std::vector<double> g{-2 * (1 - a) - 400 * a * (b - a * a), 200 * (b - a * a)};
    return {static_cast<Scalar>(f), distribute(g, x.block_size())};
  }
};

// Sum of sqrt(x_i^2 + eps_i): a smoothed |x|.
class SmoothAbs : public opt::DiffFunction {
 public:
  SmoothAbs(std::vector<double> eps, std::size_t block_size) : eps_(distribute(eps, block_size)) {}

  Evaluation compute(const DistVector& x) override {
    const DistVector r = (x * x + eps_).map([](Scalar v) { return std::sqrt(v); });
    return {r.sum(), x / r};
  }

 private:
  DistVector eps_;
};

inline double soft_threshold(double c, double t) {
  if (std::abs(c) <= t) return 0.0;
  return c > 0 ? c - t : c + t;
}

inline bool bit_equal(const std::vector<Scalar>& a, const std::vector<Scalar>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(Scalar)) == 0;
}

// Inverse-Hessian approximation built by explicit BFGS updates of gamma*I.
inline Matrix bfgs_inverse(const std::vector<std::vector<double>>& s, const std::vector<std::vector<double>>& y,
                    std::size_t d) {
  Matrix h(d, std::vector<double>(d, 0.0));
  const double gamma = s.empty() ? 1.0 : dot(s.back(), y.back()) / dot(y.back(), y.back());
  for (std::size_t i = 0; i < d; ++i) h[i][i] = gamma;
  for (std::size_t p = 0; p < s.size(); ++p) {
    const double rho = 1.0 / dot(s[p], y[p]);
    Matrix left(d, std::vector<double>(d));  // I - rho s y^T
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) left[i][j] = (i == j ? 1.0 : 0.0) - rho * s[p][i] * y[p][j];
    }
    Matrix tmp(d, std::vector<double>(d, 0.0)), next(d, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t k = 0; k < d; ++k) {
        for (std::size_t j = 0; j < d; ++j) tmp[i][j] += left[i][k] * h[k][j];
      }
    }
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t k = 0; k < d; ++k) next[i][j] += tmp[i][k] * left[j][k];
        next[i][j] += rho * s[p][i] * s[p][j];
      }
    }
    h = std::move(next);
  }
  return h;
}

}  // namespace distmin::testing
