// Benchmark comparing the OpenMP kernels against their serial reference
// implementations: Monte Carlo trials, the subset-DP expectation, and the
// count-vector enumeration. Reports wall time, speedup, and the largest
// numeric difference between the two routes.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

#include "opbm/harness.hpp"
#include "opbm/instance.hpp"
#include "opbm/oracle.hpp"
#include "opbm/transport.hpp"

namespace {

double time_ms(const std::function<void()>& fn) {
  auto t0 = std::chrono::steady_clock::now();
  fn();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void print_row(const char* name, double serial_ms, double parallel_ms, double max_diff) {
  std::printf("%-28s %10.1f %10.1f %8.2fx %12.3e\n", name, serial_ms, parallel_ms,
              serial_ms / parallel_ms, max_diff);
}

}  // namespace

int main() {
  const int threads = omp_get_max_threads();
  std::printf("threads: %d\n\n", threads);
  std::printf("%-28s %10s %10s %9s %12s\n", "kernel", "serial/ms", "omp/ms", "speedup",
              "max |diff|");

  {
    auto g = opbm::generate_lower_bound_instance(60, opbm::Rational(1, 5));
    auto flow = opbm::solve_tpp(g);
    const std::int64_t trials = 20000;
    opbm::TrialValues serial, parallel;
    double ts = time_ms([&] {
      serial = opbm::run_trials_serial(g, &flow, opbm::Policy::dispatch, trials, 7, true);
    });
    double tp = time_ms([&] {
      parallel = opbm::run_trials(g, &flow, opbm::Policy::dispatch, trials, 7, threads, true);
    });
    double diff = 0.0;
    for (std::int64_t i = 0; i < trials; ++i) {
      diff = std::max(diff, std::abs(serial.alg[i] - parallel.alg[i]));
      diff = std::max(diff, std::abs(serial.opt[i] - parallel.opt[i]));
    }
    print_row("monte_carlo_trials", ts, tp, diff);
  }

  {
    auto g = opbm::generate_random_instance(19, 4, 10.0, 8, 3);
    auto flow = opbm::solve_tpp(g);
    opbm::ExactExpectation serial, parallel;
    double ts = time_ms([&] { serial = opbm::exact_dispatch_expectation_serial(g, flow); });
    double tp = time_ms([&] { parallel = opbm::exact_dispatch_expectation(g, flow, threads); });
    double diff = std::abs(serial.value - parallel.value);
    for (std::size_t i = 0; i < serial.availability.size(); ++i) {
      diff = std::max(diff, std::abs(serial.availability[i] - parallel.availability[i]));
    }
    for (std::size_t i = 0; i < serial.edge_probabilities->size(); ++i) {
      diff = std::max(diff, std::abs((*serial.edge_probabilities)[i] -
                                     (*parallel.edge_probabilities)[i]));
    }
    print_row("dispatch_expectation_dp", ts, tp, diff);
  }

  {
    auto g = opbm::generate_random_instance(48, 4, 10.0, 12, 5);
    opbm::ExactExpectation serial, parallel;
    double ts = time_ms([&] { serial = opbm::exact_opt_expectation_serial(g); });
    double tp = time_ms([&] { parallel = opbm::exact_opt_expectation(g, threads); });
    print_row("opt_expectation_enum", ts, tp, std::abs(serial.value - parallel.value));
  }

  return 0;
}
