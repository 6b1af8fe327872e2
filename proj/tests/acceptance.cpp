// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hybridmm/cdag.hpp"
#include "hybridmm/dominator.hpp"
#include "hybridmm/engine.hpp"
#include "hybridmm/lemmas.hpp"
#include "hybridmm/msp.hpp"
#include "hybridmm/report.hpp"
#include "hybridmm/schedule_gen.hpp"
#include "hybridmm/simulator.hpp"

using namespace hybridmm;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

bool report(int id, const char* name, const std::function<Outcome()>& body, double limit_s) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (secs > limit_s) {
    o.pass = false;
    o.detail += " (over time limit " + std::to_string(limit_s) + " s)";
  }
  std::printf("%s criterion %d %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
  std::fflush(stdout);
  return o.pass;
}

// ---- 1: functional correctness

Outcome correctness() {
  std::vector<RecursionPlan> plans;
  for (std::size_t n : {2, 4, 8, 16, 32}) {
    plans.push_back(uniform_plan(n, n, FastScheme::strassen(), StandardVariant::IterativeDef));
    plans.push_back(uniform_plan(n, n, FastScheme::strassen(), StandardVariant::BlockRecursive));
    for (std::size_t n0 = 1; n0 <= n; ++n0) plans.push_back(uniform_plan(n, n0));
    for (std::uint64_t seed = 0; seed < 20; ++seed) plans.push_back(random_plan(n, 0.5, 1000 * n + seed));
  }
  std::mt19937_64 rng(20240531);
  std::size_t pairs = 0, mismatches = 0;
  for (const RecursionPlan& p : plans)
    for (int t = 0; t < 100; ++t) {
      const Matrix A = Matrix::random(p.size(), rng), B = Matrix::random(p.size(), rng);
      ++pairs;
      if (!(execute(p, A, B).C == mat_mul_naive(A, B))) ++mismatches;
    }
  return {mismatches == 0, std::to_string(plans.size()) + " plans, " + std::to_string(pairs) + " pairs, " +
                               std::to_string(mismatches) + " mismatches"};
}

// ---- 2: bound spot checks against an independent walk

struct Walk {
  std::uint64_t nu1 = 0, nu2 = 0, t = 0;
};

// Called on the root only when n > 2 sqrt(M).
void walk(const RecursionPlan& p, std::uint64_t M, Walk& w) {
  const std::uint64_t s = p.size();
  if (p.is_leaf()) {
    ++w.nu1;
    w.t += s * s * s;
    return;
  }
  if ((s / 2) * (s / 2) < 4 * M) {
    ++w.nu2;
    return;
  }
  for (int k = 0; k < 7; ++k) walk(p.child(k), M, w);
}

Outcome spot_checks() {
  std::string detail;
  bool ok = true;
  auto expect = [&](bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail += " mismatch:" + what;
    }
  };
  {
    const RecursionPlan p = uniform_plan(16, 8);
    Walk w;
    walk(p, 4, w);
    const BoundReport r = sequential_bound(p, 16, 4, 1);
    expect(w.nu1 == 7 && w.t == 3584 && w.nu2 == 0, "walk(16,8)");
    expect(r.nu1 == w.nu1 && r.t_total == w.t && r.nu2 == w.nu2, "report(16,8)");
    // (16/8)^{log2 7} (8/4)^3 4 = 7 * 8 * 4.
    expect(std::llround(uniform_inner_term(16, 8, 4)) == 224, "inner term");
    detail += " nu1=" + std::to_string(r.nu1) + " |T|=" + std::to_string(r.t_total) +
              " inner=" + std::to_string(std::llround(uniform_inner_term(16, 8, 4)));
  }
  {
    const RecursionPlan p = uniform_plan(16, 2);
    Walk w;
    walk(p, 4, w);
    const BoundReport r = sequential_bound(p, 16, 4, 1);
    expect(w.nu2 == 49 && r.nu2 == 49 && r.nu1 == 0, "nu2(16,2)");
    expect(r.term_nu2 == 196.0 && w.nu2 * 4 == 196, "nu2 term");
    detail += " nu2=" + std::to_string(r.nu2) + " nu2*M=" + std::to_string(std::llround(r.term_nu2));
  }
  std::size_t small = 0;
  for (std::size_t n : {2, 4, 8, 16})
    for (std::uint64_t M : {1, 4, 16, 64, 256})
      for (std::uint64_t B : {1, 4})
        for (std::size_t n0 = 1; n0 <= n; n0 *= 2) {
          const RecursionPlan p = uniform_plan(n, n0);
          const BoundReport r = sequential_bound(p, n, M, B);
          Walk w;
          if (n * n > 4 * M) walk(p, M, w);
          expect(r.nu1 == w.nu1 && r.nu2 == w.nu2 && r.t_total == w.t, "walk n=" + std::to_string(n));
          if (n * n <= 4 * M) {
            ++small;
            expect(r.sequential_bound == static_cast<double>(2 * n * n) / static_cast<double>(B),
                   "small n=" + std::to_string(n));
          }
        }
  detail += " small-n cases=" + std::to_string(small);
  return {ok, detail};
}

// ---- 3 and 4: schedules

struct Measured {
  IoStats st;
  bool parsimonious = false;
};

template <class Gen>
Measured run_schedule(MachineConfig cfg, Gen&& gen) {
  PebbleMachine pm(cfg, {false, true, true});
  gen(pm);
  Measured m{pm.finish(), pm.parsimony().ok};
  return m;
}

Outcome schedule_sweep() {
  std::size_t runs = 0, violations = 0;
  std::string first;
  for (std::size_t n : {8, 16, 32, 64})
    for (std::uint64_t M : {3, 12, 48, 192})
      for (std::uint64_t B : {1, 4}) {
        const MachineConfig cfg{M, B};
        std::vector<std::pair<std::string, RecursionPlan>> plans;
        for (std::size_t n0 : {1, 4, 16}) plans.emplace_back("uniform n0=" + std::to_string(n0), uniform_plan(n, n0));
        plans.emplace_back("random", random_plan(n, 0.5, n * 131 + M));
        auto check = [&](const std::string& what, const Measured& m, const RecursionPlan& bound_plan) {
          ++runs;
          const double bound = sequential_bound(bound_plan, n, M, B).sequential_bound;
          if (!m.parsimonious || static_cast<double>(m.st.io_total) < bound) {
            ++violations;
            if (first.empty())
              first = what + " n=" + std::to_string(n) + " M=" + std::to_string(M) + " B=" + std::to_string(B);
          }
        };
        check("blocked", run_schedule(cfg, [&](MoveSink& s) { gen_standard_blocked_schedule(n, cfg, s); }),
              uniform_plan(n, n));
        for (const auto& [name, p] : plans)
          check(name, run_schedule(cfg, [&](MoveSink& s) { gen_hybrid_schedule(p, cfg, s); }), p);
      }
  return {violations == 0, std::to_string(runs) + " schedules, " + std::to_string(violations) + " violations" +
                               (first.empty() ? "" : ", first: " + first)};
}

Outcome tightness() {
  bool ok = true;
  std::string detail;
  const MachineConfig cfg{48, 1};
  for (std::size_t n0 : {1, 4, 64}) {
    const RecursionPlan p = uniform_plan(64, n0);
    const Measured m = run_schedule(cfg, [&](MoveSink& s) { gen_hybrid_schedule(p, cfg, s); });
    const double ratio = static_cast<double>(m.st.io_total) / sequential_bound(p, 64, 48, 1).sequential_bound;
    ok = ok && ratio >= 1.0 && ratio <= 50.0;
    char buf[64];
    std::snprintf(buf, sizeof buf, " n0=%zu ratio=%.3f", n0, ratio);
    detail += buf;
  }
  return {ok, detail};
}

// ---- 5: encoders

Outcome encoders() {
  bool ok = connectivity_requirement(7) == 4;
  std::size_t subsets = 0;
  for (const auto* e : {&FastScheme::strassen().encode_a, &FastScheme::strassen().encode_b}) {
    const EncoderGraph g = encoder_graph(*e);
    const ConnectivityReport r = verify_encoder_connectivity(g);
    ok = ok && verify_encoder_distinct_neighborhoods(g) && r.pass && r.checks.size() == 127;
    subsets += r.checks.size();
    for (const SubsetCheck& c : r.checks)
      if (c.subset == 0x7f) ok = ok && c.required == 4 && c.matching >= 4;
  }
  return {ok, std::to_string(subsets) + " subsets, |Y|=7 requires " + std::to_string(connectivity_requirement(7))};
}

// ---- 6: dominator oracles

Outcome oracles() {
  std::mt19937_64 rng(77);
  std::size_t graphs = 0, agree = 0;
  auto compare = [&](const Cdag& g, const std::vector<VertexId>& t, const std::vector<VertexId>& s) {
    ++graphs;
    agree += min_dominator_size(g, t, s) == exhaustive_min_dominator(g, t, s);
  };
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 21;
    std::vector<std::pair<VertexId, VertexId>> edges;
    const unsigned density = 10 + rng() % 40;
    for (VertexId u = 0; u < n; ++u)
      for (VertexId v = u + 1; v < n; ++v)
        if (rng() % 100 < density) edges.emplace_back(u, v);
    const Cdag g = Cdag::from_edges(n, edges);
    std::vector<VertexId> s, t;
    for (VertexId v = 0; v < n; ++v) {
      if (rng() % 3 == 0) s.push_back(v);
      if (rng() % 3 == 0) t.push_back(v);
    }
    compare(g, t, s);
  }
  for (const RecursionPlan& p : {uniform_plan(1, 1), uniform_plan(2, 2),
                                 uniform_plan(2, 2, FastScheme::strassen(), StandardVariant::BlockRecursive)}) {
    const Cdag g = build_cdag(p);
    if (g.vertex_count() > 22) continue;
    compare(g, g.global_outputs(), g.global_inputs());
    const auto outs = g.global_outputs();
    for (const VertexId o : outs) compare(g, {o}, g.global_inputs());
  }
  const Cdag base = build_cdag(uniform_plan(2, 1));
  const std::size_t flow = min_dominator_size(base, base.global_outputs(), base.global_inputs());
  const std::size_t exh = exhaustive_min_dominator(base, base.global_outputs(), base.global_inputs());
  const bool ok = agree == graphs && flow == exh && flow >= 2;
  return {ok, std::to_string(agree) + "/" + std::to_string(graphs) + " small graphs agree; n=2 fast outputs: flow " +
                  std::to_string(flow) + ", exhaustive " + std::to_string(exh)};
}

// ---- 7: dominator lemma sampling

Outcome lemma_sampling() {
  std::vector<RecursionPlan> plans;
  for (std::size_t n : {2, 4, 8}) {
    for (std::size_t n0 = 1; n0 <= n; n0 *= 2) plans.push_back(uniform_plan(n, n0));
    plans.push_back(uniform_plan(n, n, FastScheme::strassen(), StandardVariant::BlockRecursive));
  }
  for (std::uint64_t seed = 1; seed <= 6; ++seed) plans.push_back(random_plan(8, 0.5, seed));
  std::size_t checked = 0, violations = 0;
  for (const RecursionPlan& p : plans) {
    const Cdag g = build_cdag(p);
    for (std::uint64_t M : {1, 4}) {
      LemmaOptions opt;
      for (const LemmaReport& r : {verify_dominator_lemma_type2(g, M, opt), verify_dominator_lemma_type1_inputs(g, M, opt),
                                   verify_dominator_lemma_type1_products(g, M, opt)}) {
        checked += r.checked;
        violations += r.violations;
      }
    }
  }
  return {violations == 0 && checked > 0, std::to_string(plans.size()) + " plans, " + std::to_string(checked) +
                                              " instances, " + std::to_string(violations) + " violations"};
}

// ---- 8: determinism

Outcome determinism() {
  const std::string text = "n=8,16\nn0=1,4\nM=12,48\nB=1,4\n";
  const std::string rtext = "n=8,16\nM=12\nB=1\nplan=random\nseed=9\ncount=3\np_fast=0.6\n";
  std::string first, second;
  for (std::string* dst : {&first, &second}) {
    std::ostringstream out, err;
    cmd_sweep(parse_sweep_config(text), out, err);
    cmd_sweep(parse_sweep_config(rtext), out, err);
    *dst = out.str();
  }
  return {first == second && !first.empty(), std::to_string(first.size()) + " bytes per run"};
}

}  // namespace

int main() {
  bool ok = true;
  ok &= report(1, "functional correctness", correctness, 60);
  ok &= report(2, "bound spot checks", spot_checks, 60);
  ok &= report(3, "schedule legality and bound sanity", schedule_sweep, 300);
  ok &= report(4, "desk-scale tightness", tightness, 300);
  ok &= report(5, "encoder checks", encoders, 1);
  ok &= report(6, "dominator oracle equivalence", oracles, 300);
  ok &= report(7, "dominator lemma sampling", lemma_sampling, 600);
  ok &= report(8, "sweep determinism", determinism, 300);
  return ok ? 0 : 1;
}
