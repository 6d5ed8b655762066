// Timing comparison of the OpenMP pairwise kernels against the serial
// reference loops. Usage: ellembed_bench [n] [d] [reps]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "ellembed/batch.hpp"
#include "ellembed/parallel.hpp"
#include "ellembed/rng.hpp"

namespace {

using namespace ellembed;

std::vector<EllipticalPoint> random_points(int n, int d, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<EllipticalPoint> points(n);
  for (auto& p : points) {
    p.mean = Vector(d);
    for (int i = 0; i < d; ++i) p.mean[i] = rng.normal();
    p.factor = Matrix(d, d);
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) p.factor(r, c) = 0.5 * rng.normal();
    }
    p.epsilon = 0.01;
    p.tau = 1.0;
  }
  return points;
}

template <typename F>
double time_best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto start = std::chrono::steady_clock::now();
    f();
    const auto stop = std::chrono::steady_clock::now();
    best = std::min(best,
                    std::chrono::duration<double>(stop - start).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 48;
  const int d = argc > 2 ? std::atoi(argv[2]) : 8;
  const int reps = argc > 3 ? std::atoi(argv[3]) : 3;
  const int iters = 6;

  auto points = random_points(n, d, 42);
  const int threads = resolve_threads(0);

  volatile double sink = 0.0;
  const double t_serial = time_best_of(reps, [&] {
    sink = reference::pairwise_w2_sq(points, points, iters).sum();
  });
  const double t_parallel = time_best_of(reps, [&] {
    sink = pairwise_w2_sq(points, points, iters, 0).sum();
  });
  const double t_serial_pol = time_best_of(reps, [&] {
    sink = reference::pairwise_polarization(points, points, iters).sum();
  });
  const double t_parallel_pol = time_best_of(reps, [&] {
    sink = pairwise_polarization(points, points, iters, 0).sum();
  });
  (void)sink;

  std::printf("pairwise kernels, n=%d d=%d ns_iters=%d threads=%d "
              "(best of %d)\n", n, d, iters, threads, reps);
  std::printf("%-24s %12s %12s %8s\n", "kernel", "serial [ms]", "openmp [ms]",
              "speedup");
  std::printf("%-24s %12.2f %12.2f %7.2fx\n", "w2_sq grid",
              1e3 * t_serial, 1e3 * t_parallel, t_serial / t_parallel);
  std::printf("%-24s %12.2f %12.2f %7.2fx\n", "polarization grid",
              1e3 * t_serial_pol, 1e3 * t_parallel_pol,
              t_serial_pol / t_parallel_pol);
  return 0;
}
