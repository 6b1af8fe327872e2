#include "hybridmm/plan.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <random>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "hybridmm/matrix.hpp"

namespace hybridmm {

namespace {

template <typename F, std::size_t... I>
std::array<RecursionPlan, 7> make_children_impl(F&& f, std::index_sequence<I...>) {
  // Evaluated left to right: braced initializer lists sequence their elements.
  return {f(static_cast<int>(I))...};
}

template <typename F>
std::array<RecursionPlan, 7> make_children(F&& f) {
  return make_children_impl(std::forward<F>(f), std::make_index_sequence<7>{});
}

std::shared_ptr<const FastScheme> builtin_ptr(const FastScheme& s) {
  return std::shared_ptr<const FastScheme>(&s, [](const FastScheme*) {});
}

}  // namespace

std::string_view variant_name(StandardVariant v) {
  return v == StandardVariant::IterativeDef ? "iterative" : "recursive";
}

std::string path_to_string(const PlanPath& p) {
  if (p.empty()) return "root";
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += '.';
    s += std::to_string(p[i] + 1);
  }
  return s;
}

bool is_prefix(const PlanPath& prefix, const PlanPath& p) {
  return prefix.size() <= p.size() && std::equal(prefix.begin(), prefix.end(), p.begin());
}

RecursionPlan RecursionPlan::leaf(std::size_t size, StandardVariant variant) {
  if (!is_pow2(size)) throw std::invalid_argument("plan leaf size must be a power of two");
  auto n = std::make_shared<Node>();
  n->size = size;
  n->variant = variant;
  return RecursionPlan(std::move(n));
}

RecursionPlan RecursionPlan::fast(std::shared_ptr<const FastScheme> scheme,
                                  std::array<RecursionPlan, 7> children) {
  if (!scheme) throw std::invalid_argument("fast node requires a scheme");
  const std::size_t h = children[0].size();
  for (const auto& c : children)
    if (c.size() != h) throw std::invalid_argument("fast node children must have equal size");
  auto n = std::make_shared<Node>();
  n->size = 2 * h;
  n->scheme = std::move(scheme);
  n->children.assign(std::make_move_iterator(children.begin()), std::make_move_iterator(children.end()));
  return RecursionPlan(std::move(n));
}

RecursionPlan RecursionPlan::fast(const FastScheme& builtin, std::array<RecursionPlan, 7> children) {
  return fast(builtin_ptr(builtin), std::move(children));
}

bool operator==(const RecursionPlan& a, const RecursionPlan& b) {
  if (a.node_ == b.node_) return true;
  if (a.size() != b.size() || a.is_leaf() != b.is_leaf()) return false;
  if (a.is_leaf()) return a.variant() == b.variant();
  if (!(a.scheme() == b.scheme())) return false;
  for (int k = 0; k < 7; ++k)
    if (!(a.child(k) == b.child(k))) return false;
  return true;
}

RecursionPlan uniform_plan(std::size_t n, std::size_t n0, const FastScheme& scheme, StandardVariant variant) {
  if (!is_pow2(n)) throw std::invalid_argument("uniform_plan: n must be a power of two");
  if (n0 == 0) throw std::invalid_argument("uniform_plan: n0 must be positive");
  std::size_t leaf = 1;
  while (leaf * 2 <= std::min(n0, n)) leaf *= 2;
  RecursionPlan p = RecursionPlan::leaf(leaf, variant);
  auto sp = builtin_ptr(scheme);
  for (std::size_t s = leaf * 2; s <= n; s *= 2) p = RecursionPlan::fast(sp, {p, p, p, p, p, p, p});
  return p;
}

RecursionPlan random_plan(std::size_t n, double p_fast, std::uint64_t seed, const FastScheme& scheme,
                          StandardVariant variant) {
  if (!is_pow2(n)) throw std::invalid_argument("random_plan: n must be a power of two");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(std::clamp(p_fast, 0.0, 1.0));
  auto sp = builtin_ptr(scheme);
  std::function<RecursionPlan(std::size_t)> build = [&](std::size_t s) -> RecursionPlan {
    if (s == 1 || !coin(rng)) return RecursionPlan::leaf(s, variant);
    return RecursionPlan::fast(sp, make_children([&](int) { return build(s / 2); }));
  };
  return build(n);
}

PlanStats plan_stats(const RecursionPlan& plan) {
  std::unordered_map<const void*, PlanStats> memo;
  std::function<const PlanStats&(const RecursionPlan&)> walk = [&](const RecursionPlan& p) -> const PlanStats& {
    if (auto it = memo.find(p.node_id()); it != memo.end()) return it->second;
    PlanStats st;
    if (p.is_leaf()) {
      st.standard_leaves = 1;
      st.leaf_sizes[p.size()] = 1;
    } else {
      st.fast_nodes = 1;
      for (int k = 0; k < 7; ++k) {
        const PlanStats& c = walk(p.child(k));
        st.fast_nodes += c.fast_nodes;
        st.standard_leaves += c.standard_leaves;
        for (auto [sz, cnt] : c.leaf_sizes) st.leaf_sizes[sz] += cnt;
      }
    }
    return memo.emplace(p.node_id(), std::move(st)).first->second;
  };
  return walk(plan);
}

void validate_plan(const RecursionPlan& plan) {
  if (!is_pow2(plan.size())) throw std::invalid_argument("plan node size must be a power of two");
  if (plan.is_leaf()) return;
  if (plan.size() < 2) throw std::invalid_argument("fast node requires size >= 2");
  for (int k = 0; k < 7; ++k) {
    if (plan.child(k).size() * 2 != plan.size())
      throw std::invalid_argument("fast node child has wrong size");
    validate_plan(plan.child(k));
  }
}

// --- text format ---------------------------------------------------------

PlanParseError::PlanParseError(std::size_t pos, std::string expected, std::string found)
    : std::runtime_error("plan parse error at offset " + std::to_string(pos) + ": expected " + expected +
                         ", found " + found),
      pos_(pos),
      expected_(std::move(expected)) {}

namespace {

void serialize_into(const RecursionPlan& p, std::string& out) {
  if (p.is_leaf()) {
    out += "S[";
    out += variant_name(p.variant());
    out += ",n=";
    out += std::to_string(p.size());
    out += ']';
    return;
  }
  out += "F[";
  out += p.scheme().name;
  out += "](";
  for (int k = 0; k < 7; ++k) {
    if (k) out += ' ';
    serialize_into(p.child(k), out);
  }
  out += ')';
}

class PlanParser {
 public:
  explicit PlanParser(std::string_view text) : text_(text) {}

  RecursionPlan parse_all() {
    RecursionPlan p = parse_node();
    skip_ws();
    if (pos_ != text_.size()) fail("end of input");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& expected) const {
    std::string found = pos_ < text_.size() ? "'" + std::string(1, text_[pos_]) + "'" : "end of input";
    throw PlanParseError(pos_, expected, found);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c) {
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("'") + c + "'");
    ++pos_;
  }

  std::string_view word() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    return text_.substr(start, pos_ - start);
  }

  std::size_t integer() {
    std::size_t start = pos_;
    std::size_t v = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      v = v * 10 + static_cast<std::size_t>(text_[pos_] - '0');
      ++pos_;
    }
    if (pos_ == start) fail("integer");
    return v;
  }

  std::size_t size_attr() {
    expect('n');
    expect('=');
    std::size_t at = pos_;
    std::size_t n = integer();
    if (!is_pow2(n)) {
      pos_ = at;
      fail("power-of-two size");
    }
    return n;
  }

  RecursionPlan parse_node() {
    skip_ws();
    if (pos_ >= text_.size()) fail("'S' or 'F'");
    const char kind = text_[pos_];
    if (kind == 'S') {
      ++pos_;
      expect('[');
      std::size_t at = pos_;
      std::string_view v = word();
      StandardVariant var;
      if (v == "iterative") {
        var = StandardVariant::IterativeDef;
      } else if (v == "recursive") {
        var = StandardVariant::BlockRecursive;
      } else {
        pos_ = at;
        fail("'iterative' or 'recursive'");
      }
      expect(',');
      std::size_t n = size_attr();
      expect(']');
      return RecursionPlan::leaf(n, var);
    }
    if (kind == 'F') {
      ++pos_;
      expect('[');
      std::size_t at = pos_;
      std::string_view name = word();
      const FastScheme* scheme = find_scheme(name);
      if (!scheme) {
        pos_ = at;
        fail("scheme name ('strassen' or 'winograd')");
      }
      std::size_t declared = 0;
      if (pos_ < text_.size() && text_[pos_] == ',') {
        ++pos_;
        declared = size_attr();
      }
      expect(']');
      expect('(');
      std::size_t child_size = 0;
      auto children = make_children([&](int k) {
        std::size_t child_at = (skip_ws(), pos_);
        RecursionPlan c = parse_node();
        if (k == 0) {
          child_size = c.size();
        } else if (c.size() != child_size) {
          pos_ = child_at;
          fail("child of size " + std::to_string(child_size));
        }
        return c;
      });
      skip_ws();
      expect(')');
      if (declared != 0 && declared != 2 * child_size) {
        pos_ = at;
        fail("n=" + std::to_string(2 * child_size) + " matching the children");
      }
      return RecursionPlan::fast(*scheme, std::move(children));
    }
    fail("'S' or 'F'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_plan(const RecursionPlan& plan) {
  std::string out;
  serialize_into(plan, out);
  return out;
}

RecursionPlan parse_plan(std::string_view text) { return PlanParser(text).parse_all(); }

}  // namespace hybridmm
