#include <algorithm>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "doctest.h"
#include "hybridmm/cdag.hpp"
#include "hybridmm/dominator.hpp"
#include "hybridmm/msp.hpp"

using namespace hybridmm;

namespace {

struct Tally {
  std::uint64_t vertices = 0, edges = 0;
};

// Vertex and edge counts from the construction rules, excluding global inputs.
Tally expected(const RecursionPlan& p) {
  const std::uint64_t s = p.size();
  if (p.is_leaf()) return {s * s * s + s * s * (s - 1), 2 * s * s * s + 2 * s * s * (s - 1)};
  const FastScheme& sc = p.scheme();
  const std::uint64_t h2 = (s / 2) * (s / 2);
  std::uint64_t nnz = 0;
  for (int k = 0; k < 7; ++k) nnz += static_cast<std::uint64_t>(sc.nnz_a(k) + sc.nnz_b(k));
  std::uint64_t dec = 0;
  for (const auto& row : sc.decode)
    for (const auto d : row) dec += d != 0;
  Tally t{h2 * (14 + 4), h2 * (nnz + dec)};
  for (int k = 0; k < 7; ++k) {
    const Tally c = expected(p.child(k));
    t.vertices += c.vertices;
    t.edges += c.edges;
  }
  return t;
}

std::set<VertexId> preds(const Cdag& g, VertexId v) { return {g.pred[v].begin(), g.pred[v].end()}; }

}  // namespace

TEST_SUITE("cdag") {
  TEST_CASE("base case of the fast scheme") {
    const Cdag g = build_cdag(uniform_plan(2, 1));
    CHECK(g.with_role(VertexRole::GlobalInput).size() == 8);
    CHECK(g.with_role(VertexRole::EncoderOut).size() == 14);
    CHECK(g.with_role(VertexRole::ElemProduct).size() == 7);
    CHECK(g.with_role(VertexRole::GlobalOutput).size() == 4);
    CHECK(g.vertex_count() == 33);
    // M1 multiplies (A11 + A22)(B11 + B22).
    const SubProblemVertices& m1 = g.subproblems.at(static_cast<std::size_t>(find_subproblem(g, {0})));
    const auto& in = g.root();
    CHECK(preds(g, m1.a_in[0]) == std::set<VertexId>{in.a_in[0], in.a_in[3]});
    CHECK(preds(g, m1.b_in[0]) == std::set<VertexId>{in.b_in[0], in.b_in[3]});
    // M3 reads A11 alone, still through its own encoder vertex.
    const SubProblemVertices& m3 = g.subproblems.at(static_cast<std::size_t>(find_subproblem(g, {2})));
    CHECK(preds(g, m3.a_in[0]) == std::set<VertexId>{in.a_in[0]});
    CHECK(g.roles[m3.a_in[0]] == VertexRole::EncoderOut);
    // C12 = M3 + M5.
    CHECK(preds(g, in.out[1]) == std::set<VertexId>{m3.out[0], g.subproblems[static_cast<std::size_t>(find_subproblem(g, {4}))].out[0]});
  }

  TEST_CASE("standard leaf summation trees") {
    const Cdag it = build_cdag(RecursionPlan::leaf(2, StandardVariant::IterativeDef));
    CHECK(it.with_role(VertexRole::ElemProduct).size() == 8);
    CHECK(it.with_role(VertexRole::GlobalOutput).size() == 4);
    CHECK(it.vertex_count() == 8 + 8 + 4);
    const Cdag chain = build_cdag(RecursionPlan::leaf(4, StandardVariant::IterativeDef));
    const Cdag tree = build_cdag(RecursionPlan::leaf(4, StandardVariant::BlockRecursive));
    CHECK(chain.vertex_count() == tree.vertex_count());
    // Longest path: chains are k-deep, balanced trees log k deep.
    auto depth = [](const Cdag& g) {
      std::vector<int> d(g.vertex_count(), 0);
      const auto order = topological_order(g);
      for (const VertexId v : *order)
        for (const VertexId w : g.succ[v]) d[w] = std::max(d[w], d[v] + 1);
      return *std::max_element(d.begin(), d.end());
    };
    CHECK(depth(chain) == 1 + 3);
    CHECK(depth(tree) == 1 + 2);
  }

  TEST_CASE("counts follow the construction") {
    std::vector<RecursionPlan> plans{uniform_plan(4, 2), uniform_plan(8, 1), uniform_plan(8, 8), random_plan(8, 0.5, 3),
                                     uniform_plan(4, 1, FastScheme::winograd())};
    for (const RecursionPlan& p : plans) {
      const Cdag g = build_cdag(p);
      const Tally t = expected(p);
      CHECK(g.vertex_count() == 2 * p.size() * p.size() + t.vertices);
      CHECK(g.edges.size() == t.edges);
    }
    const Cdag g = build_cdag(uniform_plan(4, 2));
    CHECK(g.vertex_count() == 188);
    CHECK(g.edges.size() == 312);
  }

  TEST_CASE("structural invariants") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Cdag g = build_cdag(random_plan(8, 0.6, seed));
      CHECK(topological_order(g).has_value());
      for (const VertexId v : g.with_role(VertexRole::GlobalInput)) CHECK(g.pred[v].empty());
      for (const VertexId v : g.global_outputs()) CHECK(g.succ[v].empty());
      for (const VertexId v : g.with_role(VertexRole::ElemProduct)) CHECK(g.pred[v].size() == 2);
    }
  }

  TEST_CASE("msp sub-cdags are vertex disjoint") {
    for (std::uint64_t M : {1, 4})
      for (const RecursionPlan& p : {uniform_plan(8, 1), uniform_plan(8, 2), random_plan(8, 0.7, 5)}) {
        const Cdag g = build_cdag(p);
        std::set<VertexId> seen;
        for (const auto& d : enumerate_msps(p, M))
          for (const VertexId v : subproblem_vertex_set(g, static_cast<std::size_t>(find_subproblem(g, d.path))))
            CHECK(seen.insert(v).second);
      }
  }

  TEST_CASE("size guard and export") {
    CHECK_NOTHROW(build_cdag(uniform_plan(16, 8)));
    CHECK_THROWS_AS(build_cdag(uniform_plan(32, 32)), std::invalid_argument);
    const Cdag g = build_cdag(uniform_plan(2, 1));
    const std::string text = export_cdag(g);
    CHECK(text.find("GLOBAL_INPUT") != std::string::npos);
    std::istringstream in(text);
    std::size_t edge_lines = 0;
    for (std::string line; std::getline(in, line);)
      if (!line.empty() && line[0] != '#') ++edge_lines;
    CHECK(edge_lines == g.edges.size());
  }

  TEST_CASE("dominator basics") {
    const Cdag g = build_cdag(uniform_plan(2, 1));
    const VertexId x = g.global_inputs()[0];
    CHECK(min_dominator_size(g, {x}, {x}) == 1);
    CHECK(min_dominator_size(g, {}, g.global_inputs()) == 0);
    const Cdag two = Cdag::from_edges(3, {{0, 1}});
    CHECK(min_dominator_size(two, {2}, {0}) == 0);
    CHECK(min_dominator_size(two, {1}, {0}) == 1);
    CHECK(is_dominator(two, {0}, {1}, {0}));
    CHECK_FALSE(is_dominator(two, {}, {1}, {0}));
  }

  TEST_CASE("max-flow agrees with exhaustive search on small graphs") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 150; ++trial) {
      const std::size_t n = 4 + rng() % 19;
      std::vector<std::pair<VertexId, VertexId>> edges;
      const double p = 0.1 + 0.3 * static_cast<double>(rng() % 100) / 100.0;
      for (VertexId u = 0; u < n; ++u)
        for (VertexId v = u + 1; v < n; ++v)
          if (static_cast<double>(rng() % 1000) / 1000.0 < p) edges.emplace_back(u, v);
      const Cdag g = Cdag::from_edges(n, edges);
      std::vector<VertexId> src, dst;
      for (VertexId v = 0; v < n; ++v) {
        if (rng() % 3 == 0) src.push_back(v);
        if (rng() % 3 == 0) dst.push_back(v);
      }
      CHECK(min_dominator_size(g, dst, src) == exhaustive_min_dominator(g, dst, src));
    }
    const Cdag g = build_cdag(uniform_plan(2, 1));
    const std::size_t flow = min_dominator_size(g, g.global_outputs(), g.global_inputs());
    CHECK(flow == exhaustive_min_dominator(g, g.global_outputs(), g.global_inputs()));
    CHECK(flow == 4);
  }
}
