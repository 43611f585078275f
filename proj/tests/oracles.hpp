#pragma once

// Slow reference implementations used by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "nfsrd/deep_mmd.hpp"

namespace nfsrd::oracle {

// H_ij = k(x_i, x_j) + k(y_i, y_j) - k(x_i, y_j) - k(x_j, y_i).
template <typename Kernel>
double h_entry(const Kernel& k, std::span<const double> xs, std::span<const double> ys,
               std::size_t i, std::size_t j) {
  return k(xs[i], xs[j]) + k(ys[i], ys[j]) - k(xs[i], ys[j]) - k(xs[j], ys[i]);
}

template <typename Kernel>
double mmd2_u(const Kernel& k, std::span<const double> xs, std::span<const double> ys) {
  const std::size_t m = xs.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i != j) sum += h_entry(k, xs, ys, i, j);
    }
  }
  return sum / static_cast<double>(m * (m - 1));
}

template <typename Kernel>
double variance_hat(const Kernel& k, std::span<const double> xs, std::span<const double> ys,
                    double lambda) {
  const std::size_t m = xs.size();
  const double md = static_cast<double>(m);
  double row_sq = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double r = 0.0;
    for (std::size_t j = 0; j < m; ++j) r += h_entry(k, xs, ys, i, j);
    row_sq += r * r;
    total += r;
  }
  const double v = 4.0 / (md * md * md) * row_sq - 4.0 / (md * md * md * md) * total * total + lambda;
  return std::max(v, lambda);
}

struct DeepKernel {
  const KernelParams& params;
  double operator()(double x, double y) const { return kernel_eval(params, x, y); }
};

// Largest relative error between the analytic gradient and central
// differences; the denominator is floored at `floor`.
inline double gradient_error(const KernelParams& params, std::span<const double> xs,
                             std::span<const double> ys, double lambda, double step = 1e-5,
                             double floor = 1e-6) {
  const std::vector<double> analytic = objective(params, xs, ys, lambda).gradient;
  std::vector<double> theta = params.to_vector();
  KernelParams probe = params;
  double worst = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double saved = theta[i];
    theta[i] = saved + step;
    probe.assign(theta);
    const double up = objective(probe, xs, ys, lambda, false).value;
    theta[i] = saved - step;
    probe.assign(theta);
    const double down = objective(probe, xs, ys, lambda, false).value;
    theta[i] = saved;
    const double fd = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(analytic[i]), std::abs(fd), floor});
    worst = std::max(worst, std::abs(analytic[i] - fd) / denom);
  }
  return worst;
}

}  // namespace nfsrd::oracle
