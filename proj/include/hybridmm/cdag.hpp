#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hybridmm/plan.hpp"

namespace hybridmm {

using VertexId = std::uint32_t;

enum class VertexRole : std::uint8_t { GlobalInput, EncoderOut, ElemProduct, SumNode, DecoderOut, GlobalOutput };

/// Upper-case label used in exports ("GLOBAL_INPUT", ...).
std::string_view role_name(VertexRole r);

/// Elementary product A[i][k] * B[k][j] of a standard leaf, in leaf-local indices.
struct ElemProductRef {
  VertexId vertex = 0;
  std::uint32_t i = 0, k = 0, j = 0;
};

/// Vertices of one sub-problem: its input factors, outputs and, for standard
/// leaves, its elementary products. Matrices are row-major size x size.
struct SubProblemVertices {
  PlanPath path;
  std::size_t size = 0;
  bool leaf = false;
  std::vector<VertexId> a_in, b_in, out;
  std::vector<ElemProductRef> products;
};

struct Cdag {
  std::vector<VertexRole> roles;
  std::vector<std::uint32_t> owner;  // index into subproblems of the sub-problem that computes the vertex
  std::vector<std::pair<VertexId, VertexId>> edges;
  std::vector<std::vector<VertexId>> succ, pred;
  std::vector<SubProblemVertices> subproblems;  // preorder, root first
  std::optional<RecursionPlan> plan;

  std::size_t vertex_count() const { return roles.size(); }
  const SubProblemVertices& root() const { return subproblems.front(); }
  std::vector<VertexId> global_inputs() const;
  std::vector<VertexId> global_outputs() const { return root().out; }
  std::vector<VertexId> with_role(VertexRole r) const;

  /// Plain digraph with every vertex labeled SumNode and no sub-problems.
  static Cdag from_edges(std::size_t vertices, const std::vector<std::pair<VertexId, VertexId>>& edges);
};

inline constexpr std::size_t kMaxCdagSize = 16;

/// CDAG of the algorithm described by `plan`. Standard leaves use left-deep
/// summation chains (IterativeDef) or balanced trees (BlockRecursive); every
/// encoded operand gets its own vertex, including bare quadrants.
/// Throws std::invalid_argument when plan.size() > kMaxCdagSize.
Cdag build_cdag(const RecursionPlan& plan);

/// Topological order; std::nullopt when the graph has a cycle.
std::optional<std::vector<VertexId>> topological_order(const Cdag& g);

/// Index into g.subproblems of the sub-problem at `path`, or -1.
int find_subproblem(const Cdag& g, const PlanPath& path);

/// Inputs of the sub-problem plus every vertex computed inside it.
std::vector<VertexId> subproblem_vertex_set(const Cdag& g, std::size_t index);

/// One "u v" edge per line; vertices are listed first as "# v <id> <ROLE> <path>".
std::string export_cdag(const Cdag& g);

}  // namespace hybridmm
