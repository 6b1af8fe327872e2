#pragma once

#include <cstdint>
#include <vector>

#include "hybridmm/matrix.hpp"
#include "hybridmm/plan.hpp"

namespace hybridmm {

enum class TraceKind : std::uint8_t { BlockEncode, LeafMul, BlockDecode };

enum class Factor : std::uint8_t { A, B };

struct TraceEvent {
  TraceKind kind = TraceKind::LeafMul;
  std::uint32_t level = 0;     // depth of the fast node (root = 0)
  Factor factor = Factor::A;   // BlockEncode only
  std::uint8_t index = 0;      // sub-problem (BlockEncode) or quadrant (BlockDecode)
  std::uint64_t leaf_id = 0;   // LeafMul only, in execution order
  std::size_t n_leaf = 0;      // LeafMul only
  PlanPath path;               // LeafMul only
};

struct ExecTrace {
  std::vector<TraceEvent> events;
  std::vector<std::uint64_t> leaf_products;  // n_leaf^3 indexed by leaf_id

  std::uint64_t leaf_count() const { return leaf_products.size(); }
  std::uint64_t total_products() const;
};

struct ExecResult {
  Matrix C;
  ExecTrace trace;
};

ExecResult execute(const RecursionPlan& plan, const Matrix& A, const Matrix& B);

/// Same product as execute() without recording a trace.
Matrix multiply(const RecursionPlan& plan, const Matrix& A, const Matrix& B);

Matrix execute_standard_leaf(StandardVariant variant, const Matrix& A, const Matrix& B);

}  // namespace hybridmm
