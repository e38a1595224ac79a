// Benchmark comparing the serial reference kernels against the OpenMP
// variants, and verifying that their outputs are bit-identical.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <vector>

#include "ranmt/kernels.hpp"
#include "ranmt/rng.hpp"

using namespace ranmt;
using Clock = std::chrono::steady_clock;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warmup
  auto t0 = Clock::now();
  for (int i = 0; i < reps; ++i) fn();
  auto t1 = Clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

std::vector<real_t> random_mat(size_t n, Rng& rng) {
  std::vector<real_t> m(n);
  for (auto& v : m) v = static_cast<real_t>(rng.uniform(-1.0, 1.0));
  return m;
}

bool identical(const std::vector<real_t>& a, const std::vector<real_t>& b) {
  return std::memcmp(a.data(), b.data(), a.size() * sizeof(real_t)) == 0;
}

}  // namespace

int main() {
  Rng rng(1234, "bench");
  std::printf("threads: %d\n", kern::max_threads());
  std::printf("%-28s %10s %10s %8s %10s\n", "kernel", "serial ms", "omp ms", "speedup",
              "bitwise");

  struct MmCase {
    int m, k, n;
    int reps;
  };
  for (const auto& c : {MmCase{64, 64, 256, 200}, {128, 512, 512, 30}, {512, 512, 512, 10},
                        MmCase{32, 128, 2048, 40}}) {
    auto a = random_mat(static_cast<size_t>(c.m) * c.k, rng);
    auto b = random_mat(static_cast<size_t>(c.k) * c.n, rng);
    std::vector<real_t> out_s(static_cast<size_t>(c.m) * c.n), out_p(out_s);
    const double ts = time_ms(
        [&] { kern::matmul_serial(a.data(), b.data(), out_s.data(), c.m, c.k, c.n, false, false, false); },
        c.reps);
    const double tp = time_ms(
        [&] { kern::matmul_parallel(a.data(), b.data(), out_p.data(), c.m, c.k, c.n, false, false, false); },
        c.reps);
    char name[64];
    std::snprintf(name, sizeof(name), "matmul %dx%dx%d", c.m, c.k, c.n);
    std::printf("%-28s %10.3f %10.3f %8.2fx %10s\n", name, ts, tp, ts / tp,
                identical(out_s, out_p) ? "ok" : "DIFF");
  }

  {
    const int rows = 4096, cols = 512;
    auto x = random_mat(static_cast<size_t>(rows) * cols, rng);
    std::vector<real_t> y_s(x.size()), y_p(x.size());
    const double ts = time_ms([&] { kern::softmax_rows_serial(x.data(), y_s.data(), rows, cols); }, 20);
    const double tp = time_ms([&] { kern::softmax_rows_parallel(x.data(), y_p.data(), rows, cols); }, 20);
    std::printf("%-28s %10.3f %10.3f %8.2fx %10s\n", "softmax 4096x512", ts, tp, ts / tp,
                identical(y_s, y_p) ? "ok" : "DIFF");
  }

  {
    const size_t n = 1 << 22;
    auto x = random_mat(n, rng);
    std::vector<real_t> y_s(n), y_p(n);
    const double ts = time_ms([&] { kern::vtanh_serial(x.data(), y_s.data(), n); }, 10);
    const double tp = time_ms([&] { kern::vtanh_parallel(x.data(), y_p.data(), n); }, 10);
    std::printf("%-28s %10.3f %10.3f %8.2fx %10s\n", "tanh 4M", ts, tp, ts / tp,
                identical(y_s, y_p) ? "ok" : "DIFF");
  }
  return 0;
}
