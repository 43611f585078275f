#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nfsrd/rng.hpp"

namespace nfsrd {

// Fully connected network on scalar inputs: rectifier on hidden layers,
// identity on the output layer.
struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
};

struct Mlp {
  std::vector<DenseLayer> layers;

  static Mlp random(std::span<const std::size_t> widths, Rng& rng);
  std::size_t output_width() const;
  std::size_t parameter_count() const;
  // One row of extracted features per input value.
  Eigen::MatrixXd forward(std::span<const double> inputs) const;
};

inline constexpr std::size_t kDefaultWidths[] = {1, 32, 32, 8};

// Deep kernel
//   k(x, y) = {(1 - eps) exp(-|phi(x) - phi(y)|^2 / (2 s_phi^2)) + eps}
//             * exp(-(x - y)^2 / (2 s_q^2))
// with s_phi = exp(log_sigma_phi), s_q = exp(log_sigma_q) and
// eps = 1 / (1 + exp(-logit_eps)).
struct KernelParams {
  Mlp mlp;
  double log_sigma_phi = 0.0;
  double log_sigma_q = 0.0;
  double logit_eps = 0.0;

  double sigma_phi() const;
  double sigma_q() const;
  double mixing() const;

  // Flat layout: per layer the weights (column-major) then the bias, followed
  // by log_sigma_phi, log_sigma_q, logit_eps.
  std::vector<double> to_vector() const;
  void assign(std::span<const double> flat);
};

struct GaussianKernel {
  double bandwidth = 1.0;
  double operator()(double x, double y) const;
};

double kernel_eval(const KernelParams& params, double x, double y);

// Kernel matrix of a pooled sample, computed in parallel over rows.
Eigen::MatrixXd gram(const GaussianKernel& kernel, std::span<const double> pool);
Eigen::MatrixXd gram(const KernelParams& params, std::span<const double> pool);

// Unbiased MMD^2 from a pooled kernel matrix; `x_idx` and `y_idx` index the
// two samples inside the pool and must have equal length >= 2.
double mmd2_u_from_gram(const Eigen::MatrixXd& k, std::span<const std::size_t> x_idx,
                        std::span<const std::size_t> y_idx);

// Throws DataError if the lengths differ or are below 2.
double mmd2_u(const GaussianKernel& kernel, std::span<const double> xs, std::span<const double> ys);
double mmd2_u(const KernelParams& params, std::span<const double> xs, std::span<const double> ys);

// 4 m^-3 sum_i (sum_j H_ij)^2 - 4 m^-4 (sum_ij H_ij)^2 + lambda over the full
// H matrix including its diagonal, floored at lambda.
double variance_hat(const GaussianKernel& kernel, std::span<const double> xs,
                    std::span<const double> ys, double lambda);
double variance_hat(const KernelParams& params, std::span<const double> xs,
                    std::span<const double> ys, double lambda);

struct Objective {
  double value = 0.0;  // mmd2 / sqrt(variance)
  double mmd2 = 0.0;
  double variance = 0.0;
  std::vector<double> gradient;  // same layout as KernelParams::to_vector
};

// Variance-normalized MMD^2 and its exact gradient.
Objective objective(const KernelParams& params, std::span<const double> xs,
                    std::span<const double> ys, double lambda, bool with_gradient = true);

struct TrainConfig {
  std::size_t epochs = 200;
  double learning_rate = 5e-4;
  double lambda = 1e-8;
  std::uint64_t seed = 0;
  bool train_mixing = true;
  double initial_mixing = 0.1;
};

struct TrainedKernel {
  KernelParams params;
  std::vector<double> objective_trace;  // objective before each epoch, then the final value
  bool degenerate = false;              // all training points identical; init returned
};

// Seeded initialization: He-scaled Gaussian MLP weights, zero biases,
// median-heuristic lengthscales and the configured initial mixing weight.
KernelParams init_kernel(std::span<const double> xs, std::span<const double> ys,
                         const TrainConfig& config, bool* degenerate = nullptr);

// Adam ascent on the variance-normalized MMD^2. Requires equal lengths >= 4.
TrainedKernel train_kernel(std::span<const double> xs, std::span<const double> ys,
                           const TrainConfig& config);

struct TestResult {
  double statistic = 0.0;
  std::vector<double> perm_stats;
  double threshold = 0.0;
  double p_value = 1.0;
  bool reject = false;
};

// Permutation calibration of mmd2_u: the 2m values are pooled and each
// replica reassigns them to two halves. p = (1 + #{perm >= stat}) / (1 + n_perm);
// threshold is the ceil((1 - alpha)(n_perm + 1))-th smallest permuted value
// (+inf when that exceeds n_perm); reject iff statistic > threshold.
TestResult permutation_test(const KernelParams& params, std::span<const double> xs,
                            std::span<const double> ys, std::size_t n_perm, double alpha,
                            std::uint64_t seed);
TestResult permutation_test(const GaussianKernel& kernel, std::span<const double> xs,
                            std::span<const double> ys, std::size_t n_perm, double alpha,
                            std::uint64_t seed);

// Builds a TestResult from a statistic and its permutation replicas.
TestResult summarize_permutations(double statistic, std::vector<double> perm_stats, double alpha);

struct MmdTestConfig {
  TrainConfig train;
  std::size_t n_perm = 100;
  double alpha = 0.05;
};

struct MmdTestOutcome {
  TestResult result;
  TrainedKernel kernel;
};

// Full two-sample test: the first half of each sample trains the kernel, the
// second half is tested. train.seed drives initialization; the permutation
// stream is derived from it.
MmdTestOutcome mmd_d_test(std::span<const double> xs, std::span<const double> ys,
                          const MmdTestConfig& config);

namespace serial {
Eigen::MatrixXd gram(const KernelParams& params, std::span<const double> pool);
std::vector<double> permutation_stats(const Eigen::MatrixXd& pooled_gram, std::size_t m,
                                      std::size_t n_perm, std::uint64_t seed);
}  // namespace serial

std::vector<double> permutation_stats(const Eigen::MatrixXd& pooled_gram, std::size_t m,
                                      std::size_t n_perm, std::uint64_t seed);

double median_pairwise_distance(std::span<const double> values);

}  // namespace nfsrd
