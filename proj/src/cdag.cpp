#include "hybridmm/cdag.hpp"

#include <sstream>
#include <stdexcept>

namespace hybridmm {

std::string_view role_name(VertexRole r) {
  switch (r) {
    case VertexRole::GlobalInput:
      return "GLOBAL_INPUT";
    case VertexRole::EncoderOut:
      return "ENCODER_OUT";
    case VertexRole::ElemProduct:
      return "ELEM_PRODUCT";
    case VertexRole::SumNode:
      return "SUM_NODE";
    case VertexRole::DecoderOut:
      return "DECODER_OUT";
    case VertexRole::GlobalOutput:
      return "GLOBAL_OUTPUT";
  }
  return "?";
}

std::vector<VertexId> Cdag::global_inputs() const {
  std::vector<VertexId> v = root().a_in;
  v.insert(v.end(), root().b_in.begin(), root().b_in.end());
  return v;
}

std::vector<VertexId> Cdag::with_role(VertexRole r) const {
  std::vector<VertexId> v;
  for (VertexId x = 0; x < roles.size(); ++x)
    if (roles[x] == r) v.push_back(x);
  return v;
}

Cdag Cdag::from_edges(std::size_t vertices, const std::vector<std::pair<VertexId, VertexId>>& edges) {
  Cdag g;
  g.roles.assign(vertices, VertexRole::SumNode);
  g.owner.assign(vertices, 0);
  g.succ.resize(vertices);
  g.pred.resize(vertices);
  for (const auto& [u, v] : edges) {
    if (u >= vertices || v >= vertices) throw std::invalid_argument("from_edges: vertex out of range");
    g.edges.emplace_back(u, v);
    g.succ[u].push_back(v);
    g.pred[v].push_back(u);
  }
  return g;
}

namespace {

class Builder {
 public:
  Cdag g;

  VertexId add(VertexRole r, std::uint32_t owner) {
    const auto v = static_cast<VertexId>(g.roles.size());
    g.roles.push_back(r);
    g.owner.push_back(owner);
    g.succ.emplace_back();
    g.pred.emplace_back();
    return v;
  }

  void edge(VertexId u, VertexId v) {
    g.edges.emplace_back(u, v);
    g.succ[u].push_back(v);
    g.pred[v].push_back(u);
  }

  VertexId balanced_sum(const std::vector<VertexId>& terms, std::size_t lo, std::size_t hi, std::uint32_t owner) {
    if (hi - lo == 1) return terms[lo];
    const std::size_t mid = lo + (hi - lo) / 2;
    const VertexId l = balanced_sum(terms, lo, mid, owner);
    const VertexId r = balanced_sum(terms, mid, hi, owner);
    const VertexId t = add(VertexRole::SumNode, owner);
    edge(l, t);
    edge(r, t);
    return t;
  }

  std::vector<VertexId> build(const RecursionPlan& p, std::vector<VertexId> a, std::vector<VertexId> b, PlanPath path) {
    const auto idx = static_cast<std::uint32_t>(g.subproblems.size());
    const std::size_t s = p.size();
    {
      SubProblemVertices rec;
      rec.path = path;
      rec.size = s;
      rec.leaf = p.is_leaf();
      rec.a_in = a;
      rec.b_in = b;
      g.subproblems.push_back(std::move(rec));
    }
    std::vector<VertexId> out(s * s);
    if (p.is_leaf()) {
      std::vector<ElemProductRef> products;
      for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < s; ++j) {
          std::vector<VertexId> terms;
          for (std::size_t k = 0; k < s; ++k) {
            const VertexId v = add(VertexRole::ElemProduct, idx);
            edge(a[i * s + k], v);
            edge(b[k * s + j], v);
            terms.push_back(v);
            products.push_back({v, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(j)});
          }
          if (p.variant() == StandardVariant::BlockRecursive) {
            out[i * s + j] = balanced_sum(terms, 0, s, idx);
          } else {
            VertexId acc = terms[0];
            for (std::size_t k = 1; k < s; ++k) {
              const VertexId t = add(VertexRole::SumNode, idx);
              edge(acc, t);
              edge(terms[k], t);
              acc = t;
            }
            out[i * s + j] = acc;
          }
        }
      g.subproblems[idx].products = std::move(products);
      g.subproblems[idx].out = out;
      return out;
    }

    const FastScheme& sc = p.scheme();
    const std::size_t h = s / 2;
    auto entry = [&](const std::vector<VertexId>& m, int q, std::size_t i, std::size_t j) {
      return m[(static_cast<std::size_t>(q / 2) * h + i) * s + static_cast<std::size_t>(q % 2) * h + j];
    };
    std::array<std::vector<VertexId>, 7> ea, eb;
    for (auto& v : ea) v.resize(h * h);
    for (auto& v : eb) v.resize(h * h);
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < h; ++j)
        for (std::size_t k = 0; k < 7; ++k) {
          const VertexId va = add(VertexRole::EncoderOut, idx);
          const VertexId vb = add(VertexRole::EncoderOut, idx);
          for (int q = 0; q < 4; ++q) {
            if (sc.encode_a[k][static_cast<std::size_t>(q)] != 0) edge(entry(a, q, i, j), va);
            if (sc.encode_b[k][static_cast<std::size_t>(q)] != 0) edge(entry(b, q, i, j), vb);
          }
          ea[k][i * h + j] = va;
          eb[k][i * h + j] = vb;
        }
    std::array<std::vector<VertexId>, 7> prod;
    for (std::size_t k = 0; k < 7; ++k) {
      PlanPath child_path = path;
      child_path.push_back(static_cast<std::uint8_t>(k));
      prod[k] = build(p.child(static_cast<int>(k)), std::move(ea[k]), std::move(eb[k]), std::move(child_path));
    }
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < h; ++j)
        for (int q = 0; q < 4; ++q) {
          const VertexId v = add(VertexRole::DecoderOut, idx);
          for (std::size_t k = 0; k < 7; ++k)
            if (sc.decode[static_cast<std::size_t>(q)][k] != 0) edge(prod[k][i * h + j], v);
          out[(static_cast<std::size_t>(q / 2) * h + i) * s + static_cast<std::size_t>(q % 2) * h + j] = v;
        }
    g.subproblems[idx].out = out;
    return out;
  }
};

}  // namespace

Cdag build_cdag(const RecursionPlan& plan) {
  const std::size_t n = plan.size();
  if (n > kMaxCdagSize)
    throw std::invalid_argument("build_cdag: plan size " + std::to_string(n) + " exceeds " + std::to_string(kMaxCdagSize));
  Builder b;
  std::vector<VertexId> a_in(n * n), b_in(n * n);
  for (auto& v : a_in) v = b.add(VertexRole::GlobalInput, 0);
  for (auto& v : b_in) v = b.add(VertexRole::GlobalInput, 0);
  const std::vector<VertexId> out = b.build(plan, std::move(a_in), std::move(b_in), {});
  for (const VertexId v : out) b.g.roles[v] = VertexRole::GlobalOutput;
  b.g.plan = plan;
  return std::move(b.g);
}

std::optional<std::vector<VertexId>> topological_order(const Cdag& g) {
  const std::size_t n = g.vertex_count();
  std::vector<std::size_t> indeg(n);
  for (const auto& [u, v] : g.edges) ++indeg[v];
  std::vector<VertexId> order;
  order.reserve(n);
  for (VertexId v = 0; v < n; ++v)
    if (indeg[v] == 0) order.push_back(v);
  for (std::size_t head = 0; head < order.size(); ++head)
    for (const VertexId w : g.succ[order[head]])
      if (--indeg[w] == 0) order.push_back(w);
  if (order.size() != n) return std::nullopt;
  return order;
}

int find_subproblem(const Cdag& g, const PlanPath& path) {
  for (std::size_t i = 0; i < g.subproblems.size(); ++i)
    if (g.subproblems[i].path == path) return static_cast<int>(i);
  return -1;
}

std::vector<VertexId> subproblem_vertex_set(const Cdag& g, std::size_t index) {
  const SubProblemVertices& sp = g.subproblems.at(index);
  std::vector<VertexId> v = sp.a_in;
  v.insert(v.end(), sp.b_in.begin(), sp.b_in.end());
  for (VertexId x = 0; x < g.vertex_count(); ++x) {
    if (g.roles[x] == VertexRole::GlobalInput) continue;
    if (is_prefix(sp.path, g.subproblems[g.owner[x]].path)) v.push_back(x);
  }
  return v;
}

std::string export_cdag(const Cdag& g) {
  std::ostringstream os;
  os << "# cdag vertices=" << g.vertex_count() << " edges=" << g.edges.size() << "\n";
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    os << "# v " << v << ' ' << role_name(g.roles[v]);
    if (!g.subproblems.empty()) os << ' ' << path_to_string(g.subproblems[g.owner[v]].path);
    os << "\n";
  }
  for (const auto& [u, v] : g.edges) os << u << ' ' << v << "\n";
  return os.str();
}

}  // namespace hybridmm
