#include <cmath>
#include <random>

#include "doctest.h"
#include "hybridmm/msp.hpp"
#include "hybridmm/schedule_gen.hpp"
#include "hybridmm/simulator.hpp"

using namespace hybridmm;

namespace {

void check_schedule(const Schedule& s, MachineConfig cfg, const RecursionPlan* plan, std::mt19937_64& rng) {
  const std::size_t n = s.layout.n;
  const Matrix a = Matrix::random(n, rng), b = Matrix::random(n, rng);
  CHECK(simulate_values(s, cfg, a, b) == mat_mul_naive(a, b));
  const ParsimonyReport pr = check_parsimonious(s);
  CHECK(pr.ok);
  const IoStats st = simulate(s, cfg);
  CHECK(st.peak_cache <= cfg.M);
  if (plan) CHECK(static_cast<double>(st.io_total) >= sequential_bound(*plan, n, cfg.M, cfg.B).sequential_bound);
}

}  // namespace

TEST_SUITE("schedule_gen") {
  TEST_CASE("blocked tile is the largest power of two with three tiles in cache") {
    for (std::size_t n : {1, 2, 8, 64})
      for (std::uint64_t M : {3, 4, 11, 12, 48, 100, 192, 10000}) {
        const std::size_t t = blocked_tile(n, M);
        CHECK(t >= 1);
        CHECK(t <= n);
        CHECK((t & (t - 1)) == 0);
        CHECK(3 * t * t <= M);
        CHECK((2 * t > n || 3 * 4 * t * t > M));
      }
  }

  TEST_CASE("standard blocked I/O count with unit blocks") {
    for (std::size_t n : {4, 8, 16})
      for (std::uint64_t M : {3, 12, 48}) {
        const std::size_t t = blocked_tile(n, M);
        const IoStats st = simulate(gen_standard_blocked_schedule(n, {M, 1}), {M, 1});
        CHECK(st.reads == 2 * n * n * n / t);
        CHECK(st.writes == n * n);
      }
  }

  TEST_CASE("blocked I/O stays within the schedule constant when blocks fit a tile row") {
    for (std::size_t n : {8, 16, 32})
      for (std::uint64_t M : {3, 12, 48, 192})
        for (std::uint64_t B : {1, 2, 4}) {
          if (B > blocked_tile(n, M)) continue;
          const IoStats st = simulate(gen_standard_blocked_schedule(n, {M, B}), {M, B});
          const double nd = static_cast<double>(n), bd = static_cast<double>(B);
          CHECK(static_cast<double>(st.io_total) <= 8.0 * nd * nd * nd / (bd * std::sqrt(static_cast<double>(M))) +
                                                         3.0 * nd * nd / bd);
        }
  }

  TEST_CASE("small problems run entirely in cache") {
    for (std::size_t n0 : {1, 2, 4}) {
      const IoStats st = simulate(gen_hybrid_schedule(uniform_plan(4, n0), {48, 1}), {48, 1});
      CHECK(st.io_total == 48);
    }
    const IoStats st = simulate(gen_hybrid_schedule(uniform_plan(8, 2), {1000, 4}), {1000, 4});
    CHECK(st.io_total == 3 * 64 / 4);
  }

  TEST_CASE("schedules are legal, parsimonious, correct and above the bound") {
    std::mt19937_64 rng(12);
    for (std::size_t n : {2, 4, 8, 16})
      for (std::uint64_t M : {3, 12, 48, 192})
        for (std::uint64_t B : {1, 4}) {
          const MachineConfig cfg{M, B};
          check_schedule(gen_standard_blocked_schedule(n, cfg), cfg, nullptr, rng);
          std::vector<RecursionPlan> plans;
          for (std::size_t n0 = 1; n0 <= n; n0 *= 2) plans.push_back(uniform_plan(n, n0));
          plans.push_back(uniform_plan(n, 1, FastScheme::winograd()));
          plans.push_back(random_plan(n, 0.5, n * 31 + M));
          for (const RecursionPlan& p : plans) check_schedule(gen_hybrid_schedule(p, cfg), cfg, &p, rng);
        }
  }

  TEST_CASE("streaming into the simulator matches the materialized schedule") {
    const RecursionPlan p = uniform_plan(16, 2);
    const MachineConfig cfg{12, 1};
    PebbleMachine pm(cfg);
    gen_hybrid_schedule(p, cfg, pm);
    const IoStats streamed = pm.finish();
    const IoStats whole = simulate(gen_hybrid_schedule(p, cfg), cfg);
    CHECK(streamed.io_total == whole.io_total);
    CHECK(streamed.peak_cache == whole.peak_cache);
  }

  TEST_CASE("invalid machine configurations") {
    CHECK_THROWS(gen_hybrid_schedule(uniform_plan(4, 1), {2, 1}));
    CHECK_THROWS(gen_standard_blocked_schedule(6, {12, 1}));
  }
}
