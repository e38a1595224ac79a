#include <doctest.h>

#include <array>
#include <vector>

#include "ranmt/kernels.hpp"
#include "ranmt/rng.hpp"

using namespace ranmt;

namespace {

std::vector<real_t> random_mat(int r, int c, Rng& rng) {
  std::vector<real_t> m(static_cast<size_t>(r) * c);
  for (auto& v : m) v = static_cast<real_t>(rng.uniform(-2.0, 2.0));
  return m;
}

}  // namespace

TEST_CASE("matmul serial and parallel are bit-identical") {
  Rng rng(42, "kernels");
  const std::vector<std::array<int, 3>> shapes{{1, 1, 1}, {3, 4, 5}, {17, 33, 29}, {64, 128, 96}};
  for (auto [m, k, n] : shapes) {
    auto a = random_mat(m, k, rng);
    auto b = random_mat(k, n, rng);
    std::vector<real_t> c1(static_cast<size_t>(m) * n), c2(c1);
    kern::matmul_serial(a.data(), b.data(), c1.data(), m, k, n, false, false, false);
    kern::matmul_parallel(a.data(), b.data(), c2.data(), m, k, n, false, false, false);
    CHECK(c1 == c2);

    // transposed variants
    auto at = random_mat(k, m, rng);
    kern::matmul_serial(at.data(), b.data(), c1.data(), m, k, n, true, false, false);
    kern::matmul_parallel(at.data(), b.data(), c2.data(), m, k, n, true, false, false);
    CHECK(c1 == c2);

    auto bt = random_mat(n, k, rng);
    kern::matmul_serial(a.data(), bt.data(), c1.data(), m, k, n, false, true, false);
    kern::matmul_parallel(a.data(), bt.data(), c2.data(), m, k, n, false, true, false);
    CHECK(c1 == c2);
  }
}

TEST_CASE("matmul identity and hand-computed product") {
  // [[1,2],[3,4]] * [[1],[1]] = [[3],[7]]
  std::vector<real_t> a{1, 2, 3, 4}, b{1, 1}, c(2);
  kern::matmul(a.data(), b.data(), c.data(), 2, 2, 1);
  CHECK(c[0] == doctest::Approx(3));
  CHECK(c[1] == doctest::Approx(7));

  std::vector<real_t> eye{1, 0, 0, 1}, out(4);
  kern::matmul(a.data(), eye.data(), out.data(), 2, 2, 2);
  CHECK(out == a);

  std::vector<real_t> zero{0, 0, 0, 0};
  kern::matmul(zero.data(), a.data(), out.data(), 2, 2, 2);
  CHECK(out == std::vector<real_t>{0, 0, 0, 0});
}

TEST_CASE("matmul transpose agrees with explicit transposition") {
  Rng rng(7, "kernels");
  const int m = 5, k = 7, n = 3;
  auto a = random_mat(m, k, rng);
  auto b = random_mat(k, n, rng);
  std::vector<real_t> ref(static_cast<size_t>(m) * n);
  kern::matmul_serial(a.data(), b.data(), ref.data(), m, k, n, false, false, false);

  std::vector<real_t> at(static_cast<size_t>(k) * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < k; ++j) at[static_cast<size_t>(j) * m + i] = a[static_cast<size_t>(i) * k + j];
  std::vector<real_t> c(static_cast<size_t>(m) * n);
  kern::matmul_serial(at.data(), b.data(), c.data(), m, k, n, true, false, false);
  for (size_t i = 0; i < ref.size(); ++i) CHECK(c[i] == doctest::Approx(ref[i]));

  std::vector<real_t> bt(static_cast<size_t>(n) * k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < n; ++j) bt[static_cast<size_t>(j) * k + i] = b[static_cast<size_t>(i) * n + j];
  kern::matmul_serial(a.data(), bt.data(), c.data(), m, k, n, false, true, false);
  for (size_t i = 0; i < ref.size(); ++i) CHECK(c[i] == doctest::Approx(ref[i]));
}

TEST_CASE("softmax rows: serial == parallel, sums to one, stable at 1e4") {
  Rng rng(3, "kernels");
  const int rows = 33, cols = 50;
  auto x = random_mat(rows, cols, rng);
  x[0] = real_t(1e4);
  x[1] = real_t(-1e4);
  std::vector<real_t> y1(x.size()), y2(x.size());
  kern::softmax_rows_serial(x.data(), y1.data(), rows, cols);
  kern::softmax_rows_parallel(x.data(), y2.data(), rows, cols);
  CHECK(y1 == y2);
  for (int r = 0; r < rows; ++r) {
    double sum = 0;
    for (int c = 0; c < cols; ++c) {
      CHECK(std::isfinite(y1[static_cast<size_t>(r) * cols + c]));
      CHECK(y1[static_cast<size_t>(r) * cols + c] >= 0);
      sum += y1[static_cast<size_t>(r) * cols + c];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("elementwise kernels: serial == parallel") {
  Rng rng(9, "kernels");
  auto x = random_mat(123, 17, rng);
  std::vector<real_t> a(x.size()), b(x.size());
  kern::vtanh_serial(x.data(), a.data(), x.size());
  kern::vtanh_parallel(x.data(), b.data(), x.size());
  CHECK(a == b);
  kern::vsigmoid_serial(x.data(), a.data(), x.size());
  kern::vsigmoid_parallel(x.data(), b.data(), x.size());
  CHECK(a == b);
}
