#include <random>

#include "doctest.h"
#include "hybridmm/matrix.hpp"
#include "hybridmm/ring.hpp"

using namespace hybridmm;

namespace {

constexpr std::uint64_t kP = 2147483647;

// Reference product with plain 64-bit modular arithmetic.
std::vector<std::uint64_t> oracle_mul(const Matrix& a, const Matrix& b) {
  const std::size_t n = a.n();
  std::vector<std::uint64_t> c(n * n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      std::uint64_t acc = 0;
      for (std::size_t k = 0; k < n; ++k) acc = (acc + a(i, k).value() * b(k, j).value() % kP) % kP;
      c[i * n + j] = acc;
    }
  return c;
}

}  // namespace

TEST_SUITE("ring_matrix") {
  TEST_CASE("field operations agree with 128-bit arithmetic") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::int64_t> d(-(std::int64_t{1} << 40), std::int64_t{1} << 40);
    for (int t = 0; t < 2000; ++t) {
      const std::int64_t x = d(rng), y = d(rng);
      const RingElem a(x), b(y);
      const auto mod = [](__int128 v) {
        __int128 r = v % static_cast<__int128>(kP);
        return static_cast<std::uint64_t>(r < 0 ? r + kP : r);
      };
      CHECK(a.value() == mod(x));
      CHECK((a + b).value() == mod(static_cast<__int128>(x) + y));
      CHECK((a - b).value() == mod(static_cast<__int128>(x) - y));
      CHECK((a * b).value() == mod(static_cast<__int128>(mod(x)) * mod(y)));
      CHECK(a + (-a) == RingElem::zero());
    }
  }

  TEST_CASE("ring axioms on random triples") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::int64_t> d(0, kP - 1);
    for (int t = 0; t < 1000; ++t) {
      const RingElem a(d(rng)), b(d(rng)), c(d(rng));
      CHECK(a * (b + c) == a * b + a * c);
      CHECK((a * b) * c == a * (b * c));
      CHECK(a * RingElem::one() == a);
    }
  }

  TEST_CASE("naive product matches an independent loop") {
    std::mt19937_64 rng(3);
    for (std::size_t n : {1, 2, 3, 5, 8}) {
      const Matrix a = Matrix::random(n, rng), b = Matrix::random(n, rng);
      const Matrix c = mat_mul_naive(a, b);
      const auto ref = oracle_mul(a, b);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) CHECK(c(i, j).value() == ref[i * n + j]);
      CHECK(mat_mul_naive(a, Matrix::identity(n)) == a);
    }
  }

  TEST_CASE("literal product") {
    const Matrix a{{1, 2}, {3, 4}};
    const Matrix b{{5, 6}, {7, 8}};
    CHECK(mat_mul_naive(a, b) == Matrix{{19, 22}, {43, 50}});
    CHECK(mat_sub(mat_add(a, b), b) == a);
  }

  TEST_CASE("quadrants and blocks") {
    std::mt19937_64 rng(9);
    const Matrix a = Matrix::random(4, rng);
    Matrix r(4);
    for (int q = 0; q < 4; ++q) {
      const Matrix blk = a.quadrant(q);
      CHECK(blk(0, 0) == a(static_cast<std::size_t>(q / 2) * 2, static_cast<std::size_t>(q % 2) * 2));
      r.set_block(static_cast<std::size_t>(q / 2) * 2, static_cast<std::size_t>(q % 2) * 2, blk);
    }
    CHECK(r == a);
  }

  TEST_CASE("padding round trip") {
    std::mt19937_64 rng(1);
    for (std::size_t n : {1, 3, 5, 6, 9}) {
      const Matrix a = Matrix::random(n, rng);
      const Matrix p = pad_to_pow2(a);
      CHECK(p.n() == next_pow2(n));
      CHECK(is_pow2(p.n()));
      CHECK(truncate(p, n) == a);
      for (std::size_t i = n; i < p.n(); ++i) CHECK(p(i, 0) == RingElem::zero());
    }
  }
}
