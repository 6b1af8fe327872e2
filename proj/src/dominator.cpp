#include "hybridmm/dominator.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <queue>

namespace hybridmm {

namespace {

std::vector<char> reach(const Cdag& g, const std::vector<VertexId>& start, bool forward) {
  std::vector<char> seen(g.vertex_count(), 0);
  std::vector<VertexId> stack;
  for (const VertexId v : start)
    if (!seen[v]) {
      seen[v] = 1;
      stack.push_back(v);
    }
  while (!stack.empty()) {
    const VertexId v = stack.back();
    stack.pop_back();
    for (const VertexId w : forward ? g.succ[v] : g.pred[v])
      if (!seen[w]) {
        seen[w] = 1;
        stack.push_back(w);
      }
  }
  return seen;
}

// Vertices lying on at least one source-to-target path.
std::vector<char> relevant(const Cdag& g, const std::vector<VertexId>& targets, const std::vector<VertexId>& sources) {
  std::vector<char> f = reach(g, sources, true);
  const std::vector<char> b = reach(g, targets, false);
  for (std::size_t v = 0; v < f.size(); ++v) f[v] = static_cast<char>(f[v] && b[v]);
  return f;
}

class Dinic {
 public:
  explicit Dinic(std::size_t n) : adj_(n), level_(n), it_(n) {}

  void add(std::size_t u, std::size_t v, std::int64_t cap) {
    adj_[u].push_back({v, adj_[v].size(), cap});
    adj_[v].push_back({u, adj_[u].size() - 1, 0});
  }

  std::int64_t max_flow(std::size_t s, std::size_t t) {
    std::int64_t flow = 0;
    while (bfs(s, t)) {
      std::fill(it_.begin(), it_.end(), 0);
      while (const std::int64_t f = dfs(s, t, std::numeric_limits<std::int64_t>::max())) flow += f;
    }
    return flow;
  }

 private:
  struct Arc {
    std::size_t to, rev;
    std::int64_t cap;
  };

  bool bfs(std::size_t s, std::size_t t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<std::size_t> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop();
      for (const Arc& a : adj_[u])
        if (a.cap > 0 && level_[a.to] < 0) {
          level_[a.to] = level_[u] + 1;
          q.push(a.to);
        }
    }
    return level_[t] >= 0;
  }

  std::int64_t dfs(std::size_t u, std::size_t t, std::int64_t f) {
    if (u == t) return f;
    for (std::size_t& i = it_[u]; i < adj_[u].size(); ++i) {
      Arc& a = adj_[u][i];
      if (a.cap <= 0 || level_[a.to] != level_[u] + 1) continue;
      if (const std::int64_t d = dfs(a.to, t, std::min(f, a.cap)); d > 0) {
        a.cap -= d;
        adj_[a.to][a.rev].cap += d;
        return d;
      }
    }
    return 0;
  }

  std::vector<std::vector<Arc>> adj_;
  std::vector<int> level_;
  std::vector<std::size_t> it_;
};

}  // namespace

bool is_dominator(const Cdag& g, const std::vector<VertexId>& d, const std::vector<VertexId>& targets,
                  const std::vector<VertexId>& sources) {
  std::vector<char> blocked(g.vertex_count(), 0);
  for (const VertexId v : d) blocked[v] = 1;
  std::vector<char> is_target(g.vertex_count(), 0);
  for (const VertexId v : targets) is_target[v] = 1;
  std::vector<char> seen(g.vertex_count(), 0);
  std::vector<VertexId> stack;
  for (const VertexId v : sources)
    if (!blocked[v] && !seen[v]) {
      seen[v] = 1;
      stack.push_back(v);
    }
  while (!stack.empty()) {
    const VertexId v = stack.back();
    stack.pop_back();
    if (is_target[v]) return false;
    for (const VertexId w : g.succ[v])
      if (!blocked[w] && !seen[w]) {
        seen[w] = 1;
        stack.push_back(w);
      }
  }
  return true;
}

std::size_t min_dominator_size(const Cdag& g, const std::vector<VertexId>& targets,
                               const std::vector<VertexId>& sources) {
  if (targets.empty() || sources.empty()) return 0;
  const std::vector<char> rel = relevant(g, targets, sources);
  std::vector<std::size_t> local(g.vertex_count(), 0);
  std::size_t count = 0;
  for (VertexId v = 0; v < g.vertex_count(); ++v)
    if (rel[v]) local[v] = count++;
  if (count == 0) return 0;
  constexpr std::int64_t kInf = std::numeric_limits<std::int32_t>::max();
  const std::size_t src = 2 * count, sink = 2 * count + 1;
  Dinic net(2 * count + 2);
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (!rel[v]) continue;
    net.add(2 * local[v], 2 * local[v] + 1, 1);
    for (const VertexId w : g.succ[v])
      if (rel[w]) net.add(2 * local[v] + 1, 2 * local[w], kInf);
  }
  for (const VertexId v : sources)
    if (rel[v]) net.add(src, 2 * local[v], kInf);
  for (const VertexId v : targets)
    if (rel[v]) net.add(2 * local[v] + 1, sink, kInf);
  return static_cast<std::size_t>(net.max_flow(src, sink));
}

std::size_t exhaustive_min_dominator(const Cdag& g, const std::vector<VertexId>& targets,
                                     const std::vector<VertexId>& sources) {
  const std::vector<char> rel = relevant(g, targets, sources);
  std::vector<VertexId> cand;
  for (VertexId v = 0; v < g.vertex_count(); ++v)
    if (rel[v]) cand.push_back(v);
  const std::size_t m = cand.size();
  for (std::size_t k = 0; k <= m; ++k) {
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    std::vector<VertexId> d(k);
    while (true) {
      for (std::size_t i = 0; i < k; ++i) d[i] = cand[idx[i]];
      if (is_dominator(g, d, targets, sources)) return k;
      std::size_t i = k;
      while (i > 0 && idx[i - 1] == m - k + i - 1) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return m;
}

}  // namespace hybridmm
