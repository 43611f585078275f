#include "nfsrd/deep_mmd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nfsrd/error.hpp"

namespace nfsrd {

namespace {

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

void require_samples(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw DataError("two-sample inputs differ in length (" + std::to_string(xs.size()) + " vs " +
                    std::to_string(ys.size()) + ")");
  }
  if (xs.size() < 2) throw DataError("two-sample inputs need at least 2 points each");
}

std::vector<double> pool_of(std::span<const double> xs, std::span<const double> ys) {
  std::vector<double> pool(xs.begin(), xs.end());
  pool.insert(pool.end(), ys.begin(), ys.end());
  return pool;
}

// Mixture term 1 - (1 - eps)(1 - p); equals 1 exactly when p == 1.
double mix(double eps, double p) { return 1.0 - (1.0 - eps) * (1.0 - p); }

// Per-point forward pass with fixed loop order so that batch and pointwise
// evaluation agree bit for bit. Optionally records pre-activations.
void forward_point(const Mlp& mlp, double input, std::vector<double>& out,
                   std::vector<std::vector<double>>* pre = nullptr) {
  std::vector<double> current{input};
  std::vector<double> next;
  for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
    const DenseLayer& layer = mlp.layers[l];
    const auto out_width = static_cast<std::size_t>(layer.weights.rows());
    next.assign(out_width, 0.0);
    for (std::size_t o = 0; o < out_width; ++o) {
      double acc = layer.bias(static_cast<Eigen::Index>(o));
      for (std::size_t i = 0; i < current.size(); ++i) {
        acc += layer.weights(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(i)) * current[i];
      }
      next[o] = acc;
    }
    if (pre) (*pre)[l] = next;
    if (l + 1 < mlp.layers.size()) {
      for (double& v : next) v = std::max(v, 0.0);
    }
    std::swap(current, next);
  }
  out = std::move(current);
}

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

RowMatrix features_of(const Mlp& mlp, std::span<const double> pool) {
  RowMatrix phi(static_cast<Eigen::Index>(pool.size()), static_cast<Eigen::Index>(mlp.output_width()));
  std::vector<double> out;
  for (std::size_t a = 0; a < pool.size(); ++a) {
    forward_point(mlp, pool[a], out);
    for (std::size_t k = 0; k < out.size(); ++k) {
      phi(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(k)) = out[k];
    }
  }
  return phi;
}

double squared_distance(const RowMatrix& phi, Eigen::Index a, Eigen::Index b) {
  double d = 0.0;
  for (Eigen::Index k = 0; k < phi.cols(); ++k) {
    const double diff = phi(a, k) - phi(b, k);
    d += diff * diff;
  }
  return d;
}

double deep_entry(const RowMatrix& phi, std::span<const double> pool, Eigen::Index a,
                  Eigen::Index b, double inv_two_phi2, double inv_two_q2, double eps) {
  const double dz = pool[static_cast<std::size_t>(a)] - pool[static_cast<std::size_t>(b)];
  const double p = std::exp(-squared_distance(phi, a, b) * inv_two_phi2);
  const double q = std::exp(-dz * dz * inv_two_q2);
  return mix(eps, p) * q;
}

// H_ij = K(x_i, x_j) + K(y_i, y_j) - K(x_i, y_j) - K(y_i, x_j) over the pooled
// matrix where x occupies 0..m-1 and y occupies m..2m-1.
Eigen::MatrixXd h_matrix(const Eigen::MatrixXd& k, Eigen::Index m) {
  Eigen::MatrixXd h(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) {
      h(i, j) = k(i, j) + k(m + i, m + j) - k(i, m + j) - k(m + i, j);
    }
  }
  return h;
}

double variance_from_h(const Eigen::MatrixXd& h, double lambda) {
  const double m = static_cast<double>(h.rows());
  const Eigen::VectorXd row_sums = h.rowwise().sum();
  const double total = row_sums.sum();
  const double v = 4.0 / (m * m * m) * row_sums.squaredNorm() -
                   4.0 / (m * m * m * m) * total * total + lambda;
  return std::max(v, lambda);
}

std::vector<std::size_t> iota_indices(std::size_t begin, std::size_t end) {
  std::vector<std::size_t> idx(end - begin);
  std::iota(idx.begin(), idx.end(), begin);
  return idx;
}

template <typename Entry>
Eigen::MatrixXd parallel_gram(std::size_t n, Entry entry) {
  const auto size = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd k(size, size);
#pragma omp parallel for schedule(static)
  for (Eigen::Index a = 0; a < size; ++a) {
    for (Eigen::Index b = 0; b < size; ++b) k(a, b) = entry(a, b);
  }
  return k;
}

}  // namespace

Mlp Mlp::random(std::span<const std::size_t> widths, Rng& rng) {
  if (widths.size() < 2 || widths.front() != 1) {
    throw DataError("MLP widths must start with input width 1 and have at least two entries");
  }
  Mlp mlp;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(widths[l]);
    const auto out = static_cast<Eigen::Index>(widths[l + 1]);
    std::normal_distribution<double> init(0.0, std::sqrt(2.0 / static_cast<double>(in)));
    DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out)};
    for (Eigen::Index j = 0; j < in; ++j) {
      for (Eigen::Index i = 0; i < out; ++i) layer.weights(i, j) = init(rng);
    }
    mlp.layers.push_back(std::move(layer));
  }
  return mlp;
}

std::size_t Mlp::output_width() const {
  return layers.empty() ? 1 : static_cast<std::size_t>(layers.back().weights.rows());
}

std::size_t Mlp::parameter_count() const {
  std::size_t count = 0;
  for (const auto& layer : layers) {
    count += static_cast<std::size_t>(layer.weights.size() + layer.bias.size());
  }
  return count;
}

Eigen::MatrixXd Mlp::forward(std::span<const double> inputs) const {
  return features_of(*this, inputs);
}

double KernelParams::sigma_phi() const { return std::exp(log_sigma_phi); }
double KernelParams::sigma_q() const { return std::exp(log_sigma_q); }
double KernelParams::mixing() const { return sigmoid(logit_eps); }

std::vector<double> KernelParams::to_vector() const {
  std::vector<double> flat;
  flat.reserve(mlp.parameter_count() + 3);
  for (const auto& layer : mlp.layers) {
    flat.insert(flat.end(), layer.weights.data(), layer.weights.data() + layer.weights.size());
    flat.insert(flat.end(), layer.bias.data(), layer.bias.data() + layer.bias.size());
  }
  flat.push_back(log_sigma_phi);
  flat.push_back(log_sigma_q);
  flat.push_back(logit_eps);
  return flat;
}

void KernelParams::assign(std::span<const double> flat) {
  if (flat.size() != mlp.parameter_count() + 3) throw DataError("parameter vector size mismatch");
  std::size_t pos = 0;
  for (auto& layer : mlp.layers) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), layer.weights.size(), layer.weights.data());
    pos += static_cast<std::size_t>(layer.weights.size());
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), layer.bias.size(), layer.bias.data());
    pos += static_cast<std::size_t>(layer.bias.size());
  }
  log_sigma_phi = flat[pos];
  log_sigma_q = flat[pos + 1];
  logit_eps = flat[pos + 2];
}

double GaussianKernel::operator()(double x, double y) const {
  const double d = x - y;
  return std::exp(-d * d / (2.0 * bandwidth * bandwidth));
}

double kernel_eval(const KernelParams& params, double x, double y) {
  const double pool[2] = {x, y};
  const RowMatrix phi = features_of(params.mlp, pool);
  const double sp = params.sigma_phi();
  const double sq = params.sigma_q();
  return deep_entry(phi, pool, 0, 1, 1.0 / (2.0 * sp * sp), 1.0 / (2.0 * sq * sq), params.mixing());
}

Eigen::MatrixXd gram(const GaussianKernel& kernel, std::span<const double> pool) {
  return parallel_gram(pool.size(), [&](Eigen::Index a, Eigen::Index b) {
    return kernel(pool[static_cast<std::size_t>(a)], pool[static_cast<std::size_t>(b)]);
  });
}

Eigen::MatrixXd gram(const KernelParams& params, std::span<const double> pool) {
  const RowMatrix phi = features_of(params.mlp, pool);
  const double sp = params.sigma_phi();
  const double sq = params.sigma_q();
  const double inv_phi = 1.0 / (2.0 * sp * sp);
  const double inv_q = 1.0 / (2.0 * sq * sq);
  const double eps = params.mixing();
  return parallel_gram(pool.size(), [&](Eigen::Index a, Eigen::Index b) {
    return deep_entry(phi, pool, a, b, inv_phi, inv_q, eps);
  });
}

namespace serial {
Eigen::MatrixXd gram(const KernelParams& params, std::span<const double> pool) {
  const RowMatrix phi = features_of(params.mlp, pool);
  const double sp = params.sigma_phi();
  const double sq = params.sigma_q();
  const double inv_phi = 1.0 / (2.0 * sp * sp);
  const double inv_q = 1.0 / (2.0 * sq * sq);
  const double eps = params.mixing();
  const auto n = static_cast<Eigen::Index>(pool.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) k(a, b) = deep_entry(phi, pool, a, b, inv_phi, inv_q, eps);
  }
  return k;
}
}  // namespace serial

double mmd2_u_from_gram(const Eigen::MatrixXd& k, std::span<const std::size_t> x_idx,
                        std::span<const std::size_t> y_idx) {
  if (x_idx.size() != y_idx.size() || x_idx.size() < 2) {
    throw DataError("mmd2_u needs two index sets of equal length >= 2");
  }
  const std::size_t m = x_idx.size();
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto xi = static_cast<Eigen::Index>(x_idx[i]);
    const auto yi = static_cast<Eigen::Index>(y_idx[i]);
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      const auto xj = static_cast<Eigen::Index>(x_idx[j]);
      const auto yj = static_cast<Eigen::Index>(y_idx[j]);
      total += k(xi, xj) + k(yi, yj) - k(xi, yj) - k(yi, xj);
    }
  }
  const double md = static_cast<double>(m);
  return total / (md * (md - 1.0));
}

double mmd2_u(const GaussianKernel& kernel, std::span<const double> xs, std::span<const double> ys) {
  require_samples(xs, ys);
  const auto pool = pool_of(xs, ys);
  const std::size_t m = xs.size();
  return mmd2_u_from_gram(gram(kernel, pool), iota_indices(0, m), iota_indices(m, 2 * m));
}

double mmd2_u(const KernelParams& params, std::span<const double> xs, std::span<const double> ys) {
  require_samples(xs, ys);
  const auto pool = pool_of(xs, ys);
  const std::size_t m = xs.size();
  return mmd2_u_from_gram(gram(params, pool), iota_indices(0, m), iota_indices(m, 2 * m));
}

double variance_hat(const GaussianKernel& kernel, std::span<const double> xs,
                    std::span<const double> ys, double lambda) {
  require_samples(xs, ys);
  const auto pool = pool_of(xs, ys);
  return variance_from_h(h_matrix(gram(kernel, pool), static_cast<Eigen::Index>(xs.size())), lambda);
}

double variance_hat(const KernelParams& params, std::span<const double> xs,
                    std::span<const double> ys, double lambda) {
  require_samples(xs, ys);
  const auto pool = pool_of(xs, ys);
  return variance_from_h(h_matrix(gram(params, pool), static_cast<Eigen::Index>(xs.size())), lambda);
}

Objective objective(const KernelParams& params, std::span<const double> xs,
                    std::span<const double> ys, double lambda, bool with_gradient) {
  require_samples(xs, ys);
  const auto pool = pool_of(xs, ys);
  const auto m = static_cast<Eigen::Index>(xs.size());
  const Eigen::Index n = 2 * m;
  const std::size_t n_layers = params.mlp.layers.size();

  // Forward pass, keeping pre-activations per layer for backpropagation.
  std::vector<Eigen::MatrixXd> pre(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    pre[l].resize(n, params.mlp.layers[l].weights.rows());
  }
  RowMatrix phi(n, static_cast<Eigen::Index>(params.mlp.output_width()));
  {
    std::vector<std::vector<double>> point_pre(n_layers);
    std::vector<double> out;
    for (Eigen::Index a = 0; a < n; ++a) {
      forward_point(params.mlp, pool[static_cast<std::size_t>(a)], out, &point_pre);
      for (std::size_t l = 0; l < n_layers; ++l) {
        for (std::size_t o = 0; o < point_pre[l].size(); ++o) {
          pre[l](a, static_cast<Eigen::Index>(o)) = point_pre[l][o];
        }
      }
      for (std::size_t k = 0; k < out.size(); ++k) phi(a, static_cast<Eigen::Index>(k)) = out[k];
    }
  }

  const double sp = params.sigma_phi();
  const double sq = params.sigma_q();
  const double eps = params.mixing();
  Eigen::MatrixXd dist(n, n);
  Eigen::MatrixXd raw2(n, n);
  Eigen::MatrixXd p(n, n);
  Eigen::MatrixXd q(n, n);
  Eigen::MatrixXd k(n, n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      const double dz = pool[static_cast<std::size_t>(a)] - pool[static_cast<std::size_t>(b)];
      dist(a, b) = squared_distance(phi, a, b);
      raw2(a, b) = dz * dz;
      p(a, b) = std::exp(-dist(a, b) / (2.0 * sp * sp));
      q(a, b) = std::exp(-raw2(a, b) / (2.0 * sq * sq));
      k(a, b) = mix(eps, p(a, b)) * q(a, b);
    }
  }

  const Eigen::MatrixXd h = h_matrix(k, m);
  const Eigen::VectorXd row_sums = h.rowwise().sum();
  const double total = row_sums.sum();
  const double md = static_cast<double>(m);
  const double mmd2 = (total - h.trace()) / (md * (md - 1.0));
  const double raw_variance =
      4.0 / (md * md * md) * row_sums.squaredNorm() - 4.0 / (md * md * md * md) * total * total + lambda;
  const bool clamped = raw_variance < lambda;
  const double variance = clamped ? lambda : raw_variance;
  const double sd = std::sqrt(variance);

  Objective result;
  result.mmd2 = mmd2;
  result.variance = variance;
  result.value = mmd2 / sd;
  if (!with_gradient) return result;

  // dJ/dH_ij.
  Eigen::MatrixXd g(m, m);
  const double d_mmd = 1.0 / (md * (md - 1.0) * sd);
  const double d_var_scale = clamped ? 0.0 : mmd2 / (2.0 * variance * sd);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const double dv = 8.0 / (md * md * md) * row_sums(i) - 8.0 / (md * md * md * md) * total;
      g(i, j) = (i == j ? 0.0 : d_mmd) - d_var_scale * dv;
    }
  }
  // dJ/dK over ordered pooled pairs.
  Eigen::MatrixXd w(n, n);
  w.topLeftCorner(m, m) = g;
  w.bottomRightCorner(m, m) = g;
  w.topRightCorner(m, m) = -g;
  w.bottomLeftCorner(m, m) = -g;

  const double grad_eps = (w.array() * (1.0 - p.array()) * q.array()).sum();
  const double grad_log_q = (w.array() * k.array() * raw2.array()).sum() / (sq * sq);
  const Eigen::ArrayXXd c = (1.0 - eps) * p.array() * q.array();
  const double grad_log_phi = (w.array() * c * dist.array()).sum() / (sp * sp);

  const Eigen::MatrixXd coupling = ((w + w.transpose()).array() * c).matrix();
  const Eigen::MatrixXd phi_col = phi;
  const Eigen::MatrixXd d_phi =
      -(coupling.rowwise().sum().asDiagonal() * phi_col - coupling * phi_col) / (sp * sp);

  // Backpropagate through the MLP.
  std::vector<Eigen::MatrixXd> grad_w(n_layers);
  std::vector<Eigen::VectorXd> grad_b(n_layers);
  Eigen::MatrixXd d_pre = d_phi;
  for (std::size_t l = n_layers; l-- > 0;) {
    Eigen::MatrixXd input;
    if (l == 0) {
      input = Eigen::Map<const Eigen::VectorXd>(pool.data(), n);
    } else {
      input = pre[l - 1].cwiseMax(0.0);
    }
    grad_w[l] = d_pre.transpose() * input;
    grad_b[l] = d_pre.colwise().sum().transpose();
    if (l > 0) {
      const Eigen::MatrixXd d_act = d_pre * params.mlp.layers[l].weights;
      d_pre = (pre[l - 1].array() > 0.0).select(d_act, 0.0);
    }
  }

  result.gradient.reserve(params.mlp.parameter_count() + 3);
  for (std::size_t l = 0; l < n_layers; ++l) {
    result.gradient.insert(result.gradient.end(), grad_w[l].data(), grad_w[l].data() + grad_w[l].size());
    result.gradient.insert(result.gradient.end(), grad_b[l].data(), grad_b[l].data() + grad_b[l].size());
  }
  result.gradient.push_back(grad_log_phi);
  result.gradient.push_back(grad_log_q);
  result.gradient.push_back(grad_eps * eps * (1.0 - eps));
  return result;
}

double median_pairwise_distance(std::span<const double> values) {
  std::vector<double> d;
  d.reserve(values.size() * (values.size() - 1) / 2);
  for (std::size_t a = 0; a < values.size(); ++a) {
    for (std::size_t b = a + 1; b < values.size(); ++b) d.push_back(std::abs(values[a] - values[b]));
  }
  if (d.empty()) return 0.0;
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid;
}

namespace {

double median_feature_distance(const RowMatrix& phi) {
  std::vector<double> d;
  const Eigen::Index n = phi.rows();
  d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) d.push_back(std::sqrt(squared_distance(phi, a, b)));
  }
  if (d.empty()) return 0.0;
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid;
}

}  // namespace

KernelParams init_kernel(std::span<const double> xs, std::span<const double> ys,
                         const TrainConfig& config, bool* degenerate) {
  const auto pool = pool_of(xs, ys);
  Rng rng = make_rng(config.seed, {stream::kMlpInit});
  KernelParams params;
  params.mlp = Mlp::random(kDefaultWidths, rng);

  const bool all_equal =
      std::all_of(pool.begin(), pool.end(), [&](double v) { return v == pool.front(); });
  if (degenerate) *degenerate = all_equal;

  double sigma_q = median_pairwise_distance(pool);
  if (!(sigma_q > 0.0)) sigma_q = 1.0;
  double sigma_phi = median_feature_distance(features_of(params.mlp, pool));
  if (!(sigma_phi > 0.0)) sigma_phi = 1.0;
  params.log_sigma_q = std::log(sigma_q);
  params.log_sigma_phi = std::log(sigma_phi);
  params.logit_eps = std::log(config.initial_mixing / (1.0 - config.initial_mixing));
  return params;
}

TrainedKernel train_kernel(std::span<const double> xs, std::span<const double> ys,
                           const TrainConfig& config) {
  if (xs.size() != ys.size()) throw DataError("kernel training halves differ in length");
  if (xs.size() < 4) throw DataError("kernel training needs at least 4 points per sample");
  if (!(config.initial_mixing > 0.0 && config.initial_mixing < 1.0)) {
    throw DataError("initial mixing weight must lie in (0, 1)");
  }

  TrainedKernel trained;
  trained.params = init_kernel(xs, ys, config, &trained.degenerate);
  if (trained.degenerate) return trained;

  std::vector<double> theta = trained.params.to_vector();
  std::vector<double> first(theta.size(), 0.0);
  std::vector<double> second(theta.size(), 0.0);
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kAdamEps = 1e-8;
  double beta1_power = 1.0;
  double beta2_power = 1.0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    Objective obj = objective(trained.params, xs, ys, config.lambda);
    trained.objective_trace.push_back(obj.value);
    if (!config.train_mixing) obj.gradient.back() = 0.0;
    beta1_power *= kBeta1;
    beta2_power *= kBeta2;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double gi = obj.gradient[i];
      if (!std::isfinite(gi)) continue;
      first[i] = kBeta1 * first[i] + (1.0 - kBeta1) * gi;
      second[i] = kBeta2 * second[i] + (1.0 - kBeta2) * gi * gi;
      const double m_hat = first[i] / (1.0 - beta1_power);
      const double v_hat = second[i] / (1.0 - beta2_power);
      theta[i] += config.learning_rate * m_hat / (std::sqrt(v_hat) + kAdamEps);
    }
    trained.params.assign(theta);
  }
  trained.objective_trace.push_back(objective(trained.params, xs, ys, config.lambda, false).value);
  return trained;
}

namespace {

double permuted_stat(const Eigen::MatrixXd& k, std::size_t m, std::uint64_t seed, std::size_t r) {
  Rng rng = make_rng(seed, {stream::kPermutation, r});
  std::vector<std::size_t> idx(2 * m);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  const std::span<const std::size_t> all(idx);
  return mmd2_u_from_gram(k, all.first(m), all.subspan(m));
}

TestResult run_permutation_test(const Eigen::MatrixXd& k, std::size_t m, std::size_t n_perm,
                                double alpha, std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DataError("alpha must lie in (0, 1)");
  if (n_perm < 1) throw DataError("n_perm must be at least 1");
  const double statistic = mmd2_u_from_gram(k, iota_indices(0, m), iota_indices(m, 2 * m));
  return summarize_permutations(statistic, permutation_stats(k, m, n_perm, seed), alpha);
}

}  // namespace

std::vector<double> permutation_stats(const Eigen::MatrixXd& pooled_gram, std::size_t m,
                                      std::size_t n_perm, std::uint64_t seed) {
  std::vector<double> stats(n_perm);
  const auto count = static_cast<std::int64_t>(n_perm);
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < count; ++r) {
    stats[static_cast<std::size_t>(r)] = permuted_stat(pooled_gram, m, seed, static_cast<std::size_t>(r));
  }
  return stats;
}

namespace serial {
std::vector<double> permutation_stats(const Eigen::MatrixXd& pooled_gram, std::size_t m,
                                      std::size_t n_perm, std::uint64_t seed) {
  std::vector<double> stats(n_perm);
  for (std::size_t r = 0; r < n_perm; ++r) stats[r] = permuted_stat(pooled_gram, m, seed, r);
  return stats;
}
}  // namespace serial

TestResult summarize_permutations(double statistic, std::vector<double> perm_stats, double alpha) {
  TestResult result;
  result.statistic = statistic;
  result.perm_stats = std::move(perm_stats);
  const std::size_t n_perm = result.perm_stats.size();
  const auto at_least = static_cast<std::size_t>(
      std::count_if(result.perm_stats.begin(), result.perm_stats.end(),
                    [&](double s) { return s >= statistic; }));
  result.p_value = static_cast<double>(1 + at_least) / static_cast<double>(1 + n_perm);

  // ceil((1 - alpha)(n + 1)) == (n + 1) - floor(alpha (n + 1)).
  const auto allowed = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(n_perm + 1)));
  const std::size_t rank = n_perm + 1 - allowed;
  if (rank > n_perm) {
    result.threshold = std::numeric_limits<double>::infinity();
  } else {
    std::vector<double> sorted = result.perm_stats;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1), sorted.end());
    result.threshold = sorted[rank - 1];
  }
  result.reject = statistic > result.threshold;
  return result;
}

TestResult permutation_test(const KernelParams& params, std::span<const double> xs,
                            std::span<const double> ys, std::size_t n_perm, double alpha,
                            std::uint64_t seed) {
  require_samples(xs, ys);
  const auto pool = pool_of(xs, ys);
  return run_permutation_test(gram(params, pool), xs.size(), n_perm, alpha, seed);
}

TestResult permutation_test(const GaussianKernel& kernel, std::span<const double> xs,
                            std::span<const double> ys, std::size_t n_perm, double alpha,
                            std::uint64_t seed) {
  require_samples(xs, ys);
  const auto pool = pool_of(xs, ys);
  return run_permutation_test(gram(kernel, pool), xs.size(), n_perm, alpha, seed);
}

MmdTestOutcome mmd_d_test(std::span<const double> xs, std::span<const double> ys,
                          const MmdTestConfig& config) {
  require_samples(xs, ys);
  const std::size_t half = xs.size() / 2;
  if (half < 4) throw DataError("MMD-D test needs at least 8 points per sample");
  MmdTestOutcome outcome;
  outcome.kernel = train_kernel(xs.first(half), ys.first(half), config.train);
  outcome.result = permutation_test(outcome.kernel.params, xs.subspan(half), ys.subspan(half),
                                    config.n_perm, config.alpha,
                                    derive_seed(config.train.seed, {stream::kPermutation}));
  return outcome;
}

}  // namespace nfsrd
