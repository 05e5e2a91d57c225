// Timing comparison of the OpenMP kernels against their serial reference
// implementations. Build and run manually:
//   cmake --build build --target bench_kernels && ./build/bench_kernels

#include <chrono>
#include <cstdio>
#include <functional>

#include "licfg/nn.hpp"
#include "licfg/rng.hpp"
#include "licfg/tensor.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace licfg;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  using clock = std::chrono::steady_clock;
  fn();  // warm-up
  const auto t0 = clock::now();
  for (int i = 0; i < reps; ++i) fn();
  return std::chrono::duration<double, std::milli>(clock::now() - t0).count() / reps;
}

Tensor random_tensor(int r, int c, Rng& rng) {
  Tensor t(r, c);
  for (double& v : t.data) v = rng.gauss();
  return t;
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP disabled at build time\n");
#endif

  Rng rng(42);

  {
    const Tensor a = random_tensor(640, 256, rng);
    const Tensor b = random_tensor(256, 256, rng);
    const double serial = time_ms([&] { (void)matmul_serial(a, b); }, 20);
    const double parallel = time_ms([&] { (void)matmul(a, b); }, 20);
    std::printf("matmul 640x256x256:       serial %8.3f ms   omp %8.3f ms   speedup %.2fx\n",
                serial, parallel, serial / parallel);
  }

  {
    const Tensor a = random_tensor(2000, 2, rng);
    const Tensor b = random_tensor(2000, 2, rng);
    const double serial = time_ms([&] { (void)pairwise_sq_dists_serial(a, b); }, 20);
    const double parallel = time_ms([&] { (void)pairwise_sq_dists(a, b); }, 20);
    std::printf("pairwise dists 2000x2000: serial %8.3f ms   omp %8.3f ms   speedup %.2fx\n",
                serial, parallel, serial / parallel);
  }

  {
    const Mlp d = mlp_init({2, 64, 64, 1}, Act::Relu, 7);
    const Tensor x = random_tensor(4096, 2, rng);
    const double fwd = time_ms([&] { (void)mlp_forward_value(d, x); }, 50);
    const double grad = time_ms([&] { (void)mlp_input_grad_value(d, x); }, 50);
    std::printf("mlp 2-64-64-1 batch 4096: forward %6.3f ms   input-grad %6.3f ms\n", fwd, grad);
  }

  return 0;
}
