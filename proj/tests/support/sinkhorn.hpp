#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace distmin::testing {

// Log-domain Sinkhorn on a dense n_x x n_y cost matrix with uniform
// marginals. The fixed point maximizes
//   L(u, v) = mean u + mean v - eps/(n_x n_y) sum_ij exp((u_i + v_j - c_ij)/eps).
struct SinkhornResult {
  std::vector<double> u;
  std::vector<double> v;
  double dual = 0;
  double marginal_error = 0;  // max over rows and columns of |sum pi - 1/n|
  std::size_t iterations = 0;
};

inline double sinkhorn_dual(const std::vector<double>& c, const std::vector<double>& u, const std::vector<double>& v,
                            double eps) {
  const std::size_t nx = u.size();
  const std::size_t ny = v.size();
  long double lin = 0;
  for (double x : u) lin += x / static_cast<long double>(nx);
  for (double x : v) lin += x / static_cast<long double>(ny);
  long double s = 0;
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) s += std::exp((u[i] + v[j] - c[i * ny + j]) / eps);
  }
  return static_cast<double>(lin - eps * s / (static_cast<long double>(nx) * ny));
}

inline double sinkhorn_marginal_error(const std::vector<double>& c, const std::vector<double>& u,
                                      const std::vector<double>& v, double eps) {
  const std::size_t nx = u.size();
  const std::size_t ny = v.size();
  const double inv = 1.0 / (static_cast<double>(nx) * static_cast<double>(ny));
  std::vector<double> cols(ny, 0.0);
  double err = 0;
  for (std::size_t i = 0; i < nx; ++i) {
    double row = 0;
    for (std::size_t j = 0; j < ny; ++j) {
      const double p = std::exp((u[i] + v[j] - c[i * ny + j]) / eps) * inv;
      row += p;
      cols[j] += p;
    }
    err = std::max(err, std::abs(row - 1.0 / static_cast<double>(nx)));
  }
  for (double col : cols) err = std::max(err, std::abs(col - 1.0 / static_cast<double>(ny)));
  return err;
}

inline SinkhornResult sinkhorn(const std::vector<double>& c, std::size_t nx, std::size_t ny, double eps,
                               double tolerance = 1e-12, std::size_t max_iterations = 200000) {
  SinkhornResult r;
  r.u.assign(nx, 0.0);
  r.v.assign(ny, 0.0);
  std::vector<double> t(std::max(nx, ny));
  // u_i = -eps log(mean_j exp((v_j - c_ij)/eps)), then the same for v.
  auto update = [&](std::vector<double>& out, const std::vector<double>& other, bool rows) {
    const std::size_t n = rows ? nx : ny;
    const std::size_t m = rows ? ny : nx;
    for (std::size_t a = 0; a < n; ++a) {
      double top = -INFINITY;
      for (std::size_t b = 0; b < m; ++b) {
        const double cost = rows ? c[a * ny + b] : c[b * ny + a];
        t[b] = (other[b] - cost) / eps;
        top = std::max(top, t[b]);
      }
      double s = 0;
      for (std::size_t b = 0; b < m; ++b) s += std::exp(t[b] - top);
      out[a] = -eps * (top + std::log(s / static_cast<double>(m)));
    }
  };
  for (r.iterations = 1; r.iterations <= max_iterations; ++r.iterations) {
    update(r.u, r.v, true);
    update(r.v, r.u, false);
    if (r.iterations % 10 == 0 && sinkhorn_marginal_error(c, r.u, r.v, eps) < tolerance) break;
  }
  r.marginal_error = sinkhorn_marginal_error(c, r.u, r.v, eps);
  r.dual = sinkhorn_dual(c, r.u, r.v, eps);
  return r;
}

}  // namespace distmin::testing
