// Times the OpenMP kernels against their serial references and checks that
// both produce identical results.
//
//   nfsrd_bench [threads...]     e.g. nfsrd_bench 1 2 4

#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "nfsrd/deep_mmd.hpp"
#include "nfsrd/forest.hpp"
#include "nfsrd/parallel.hpp"
#include "nfsrd/synth.hpp"

namespace {

template <typename F>
double time_it(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool same_forest(const nfsrd::Forest& a, const nfsrd::Forest& b) {
  return nfsrd::importance(a) == nfsrd::importance(b);
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> threads;
  for (int i = 1; i < argc; ++i) threads.push_back(std::atoi(argv[i]));
  if (threads.empty()) threads.push_back(nfsrd::max_threads());

  nfsrd::ModelSpec spec;
  spec.model_id = 2;
  spec.n = 400;
  spec.p = 100;
  spec.seed = 7;
  const auto synthetic = nfsrd::gen_model(spec);
  nfsrd::RfParams rf;
  rf.n_trees = 100;

  std::vector<double> xs(400), ys(400);
  nfsrd::Rng rng(11);
  std::normal_distribution<double> normal;
  for (auto& v : xs) v = normal(rng);
  for (auto& v : ys) v = normal(rng) + 0.5;
  nfsrd::TrainConfig tc;
  tc.seed = 3;
  const auto params = nfsrd::init_kernel(xs, ys, tc);
  std::vector<double> pool(xs);
  pool.insert(pool.end(), ys.begin(), ys.end());

  nfsrd::Forest serial_forest;
  const double forest_serial = time_it([&] { serial_forest = nfsrd::serial::fit_forest(synthetic.data, rf, 1); });
  Eigen::MatrixXd serial_gram;
  const double gram_serial = time_it([&] { serial_gram = nfsrd::serial::gram(params, pool); });
  std::vector<double> serial_perm;
  const double perm_serial =
      time_it([&] { serial_perm = nfsrd::serial::permutation_stats(serial_gram, 400, 200, 5); });

  std::cout << std::fixed << std::setprecision(4);
  std::cout << "kernel               threads   serial_s  parallel_s  speedup  identical\n";
  bool all_identical = true;
  for (int t : threads) {
    nfsrd::set_num_threads(t);
    nfsrd::Forest forest;
    const double forest_par = time_it([&] { forest = nfsrd::fit_forest(synthetic.data, rf, 1); });
    Eigen::MatrixXd g;
    const double gram_par = time_it([&] { g = nfsrd::gram(params, pool); });
    std::vector<double> perm;
    const double perm_par = time_it([&] { perm = nfsrd::permutation_stats(g, 400, 200, 5); });

    auto row = [&](const char* name, double s, double p, bool same) {
      all_identical = all_identical && same;
      std::cout << std::left << std::setw(20) << name << std::right << std::setw(8) << t
                << std::setw(11) << s << std::setw(12) << p << std::setw(9) << s / p
                << std::setw(11) << (same ? "yes" : "NO") << '\n';
    };
    row("fit_forest", forest_serial, forest_par, same_forest(serial_forest, forest));
    row("deep gram", gram_serial, gram_par, g == serial_gram);
    row("permutation_stats", perm_serial, perm_par, perm == serial_perm);
  }
  return all_identical ? 0 : 1;
}
