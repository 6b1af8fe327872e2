#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hybridmm/scheme.hpp"

namespace hybridmm {

enum class StandardVariant : std::uint8_t { IterativeDef, BlockRecursive };

std::string_view variant_name(StandardVariant v);

/// Position of a sub-problem in the recursion tree: the 0-based sub-product
/// index taken at each fast node from the root down. The root is the empty path.
using PlanPath = std::vector<std::uint8_t>;

std::string path_to_string(const PlanPath& p);
bool is_prefix(const PlanPath& prefix, const PlanPath& p);

/// Instruction-function tree of a hybrid algorithm. Immutable; subtrees may be
/// shared, which keeps uniform plans small regardless of depth.
class RecursionPlan {
 public:
  static RecursionPlan leaf(std::size_t size, StandardVariant variant);
  static RecursionPlan fast(std::shared_ptr<const FastScheme> scheme,
                            std::array<RecursionPlan, 7> children);
  static RecursionPlan fast(const FastScheme& builtin, std::array<RecursionPlan, 7> children);

  bool is_leaf() const { return node_->children.empty(); }
  std::size_t size() const { return node_->size; }
  StandardVariant variant() const { return node_->variant; }
  const FastScheme& scheme() const { return *node_->scheme; }
  const RecursionPlan& child(int k) const { return node_->children[static_cast<std::size_t>(k)]; }

  /// Identity of the underlying node; equal for shared subtrees.
  const void* node_id() const { return node_.get(); }

  friend bool operator==(const RecursionPlan& a, const RecursionPlan& b);

 private:
  struct Node {
    std::size_t size = 0;
    StandardVariant variant = StandardVariant::IterativeDef;
    std::shared_ptr<const FastScheme> scheme;
    std::vector<RecursionPlan> children;
  };
  explicit RecursionPlan(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  std::shared_ptr<const Node> node_;
};

/// Uniform plan: nodes of size > n0 are fast, nodes of size <= n0 are standard.
/// Any n0 >= 1 is accepted; n0 >= n gives a single standard leaf.
RecursionPlan uniform_plan(std::size_t n, std::size_t n0, const FastScheme& scheme = FastScheme::strassen(),
                           StandardVariant variant = StandardVariant::IterativeDef);

/// Each node is independently fast with probability p_fast; size-1 nodes are leaves.
RecursionPlan random_plan(std::size_t n, double p_fast, std::uint64_t seed,
                          const FastScheme& scheme = FastScheme::strassen(),
                          StandardVariant variant = StandardVariant::IterativeDef);

struct PlanStats {
  std::uint64_t fast_nodes = 0;
  std::uint64_t standard_leaves = 0;
  std::map<std::size_t, std::uint64_t> leaf_sizes;  // size -> count
};

PlanStats plan_stats(const RecursionPlan& plan);

/// Structural check of every node (child count, child sizes, power-of-two sizes).
void validate_plan(const RecursionPlan& plan);

/// Text format:
///   plan := leaf | fast
///   leaf := "S[" ("iterative" | "recursive") ",n=" INT "]"
///   fast := "F[" NAME ("," "n=" INT)? "](" plan{7} ")"     children separated by whitespace
std::string serialize_plan(const RecursionPlan& plan);
RecursionPlan parse_plan(std::string_view text);

class PlanParseError : public std::runtime_error {
 public:
  PlanParseError(std::size_t pos, std::string expected, std::string found);
  std::size_t position() const { return pos_; }
  const std::string& expected() const { return expected_; }

 private:
  std::size_t pos_;
  std::string expected_;
};

}  // namespace hybridmm
