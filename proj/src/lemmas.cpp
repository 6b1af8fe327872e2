#include "hybridmm/lemmas.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "hybridmm/dominator.hpp"
#include "hybridmm/msp.hpp"
#include "json.hpp"

namespace hybridmm {

EncoderGraph encoder_graph(const FastScheme::EncodeMatrix& e) {
  EncoderGraph g;
  for (std::size_t k = 0; k < 7; ++k)
    for (std::size_t q = 0; q < 4; ++q) g.adj[k][q] = e[k][q] != 0;
  return g;
}

bool verify_encoder_distinct_neighborhoods(const EncoderGraph& enc) {
  for (std::size_t x = 0; x < 7; ++x)
    for (std::size_t y = x + 1; y < 7; ++y)
      if (enc.adj[x] == enc.adj[y]) return false;
  return true;
}

int connectivity_requirement(int y) { return std::min(y, 1 + y / 2); }

namespace {

// Kuhn's augmenting paths on the (outputs in Y) x (4 inputs) graph.
int max_matching(const EncoderGraph& enc, std::uint8_t subset) {
  std::array<int, 4> match_in{-1, -1, -1, -1};
  int size = 0;
  for (int k = 0; k < 7; ++k) {
    if (!(subset >> k & 1)) continue;
    std::array<bool, 4> used{};
    auto augment = [&](auto&& self, int out) -> bool {
      for (std::size_t q = 0; q < 4; ++q) {
        if (!enc.adj[static_cast<std::size_t>(out)][q] || used[q]) continue;
        used[q] = true;
        if (match_in[q] < 0 || self(self, match_in[q])) {
          match_in[q] = out;
          return true;
        }
      }
      return false;
    };
    if (augment(augment, k)) ++size;
  }
  return size;
}

}  // namespace

ConnectivityReport verify_encoder_connectivity(const EncoderGraph& enc) {
  ConnectivityReport r;
  for (int s = 1; s < 128; ++s) {
    SubsetCheck c;
    c.subset = static_cast<std::uint8_t>(s);
    c.matching = max_matching(enc, c.subset);
    c.required = connectivity_requirement(std::popcount(static_cast<unsigned>(s)));
    c.pass = c.matching >= c.required;
    r.pass = r.pass && c.pass;
    r.checks.push_back(c);
  }
  return r;
}

namespace {

// Number of nonempty subsets of an m-set with at most kmax elements, saturated.
std::uint64_t subset_count(std::size_t m, std::size_t kmax) {
  constexpr std::uint64_t kCap = std::numeric_limits<std::uint64_t>::max() / 4;
  std::uint64_t total = 0, c = 1;
  for (std::size_t k = 1; k <= std::min(m, kmax); ++k) {
    if (c > kCap / (m - k + 1)) return kCap;
    c = c * (m - k + 1) / k;
    total += c;
    if (total > kCap) return kCap;
  }
  return total;
}

template <typename F>
void for_each_subset(std::size_t m, std::size_t kmax, F&& f) {
  for (std::size_t k = 1; k <= std::min(m, kmax); ++k) {
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      f(idx);
      std::size_t i = k;
      while (i > 0 && idx[i - 1] == m - k + i - 1) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
}

std::vector<std::size_t> random_subset(std::size_t m, std::size_t kmax, std::mt19937_64& rng) {
  std::vector<std::size_t> all(m);
  std::iota(all.begin(), all.end(), 0);
  const std::size_t k = std::uniform_int_distribution<std::size_t>(1, std::min(m, kmax))(rng);
  for (std::size_t i = 0; i < k; ++i) std::swap(all[i], all[std::uniform_int_distribution<std::size_t>(i, m - 1)(rng)]);
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

class Recorder {
 public:
  explicit Recorder(std::string lemma) { r_.lemma = std::move(lemma); }

  void check(std::string detail, std::size_t subset_size, std::size_t dom, double bound) {
    ++r_.checked;
    if (bound > 0) {
      const double ratio = static_cast<double>(dom) / bound;
      r_.min_ratio = seen_ratio_ ? std::min(r_.min_ratio, ratio) : ratio;
      seen_ratio_ = true;
    }
    if (static_cast<double>(dom) + 1e-9 < bound) {
      ++r_.violations;
      if (r_.failures.size() < 10)
        r_.failures.push_back({r_.lemma, std::move(detail), subset_size, dom, bound, false});
    }
  }
  void note(std::string s) { r_.notes.push_back(std::move(s)); }
  LemmaReport take() { return std::move(r_); }

 private:
  LemmaReport r_;
  bool seen_ratio_ = false;
};

std::vector<std::pair<MspDescriptor, const SubProblemVertices*>> msps_of(const Cdag& g, std::uint64_t M, int type) {
  std::vector<std::pair<MspDescriptor, const SubProblemVertices*>> out;
  if (!g.plan) return out;
  for (const MspDescriptor& d : enumerate_msps(*g.plan, M))
    if (d.msp_type == type) out.emplace_back(d, &g.subproblems.at(static_cast<std::size_t>(find_subproblem(g, d.path))));
  return out;
}

}  // namespace

LemmaReport verify_dominator_lemma_type2(const Cdag& g, std::uint64_t M, const LemmaOptions& opt) {
  Recorder rec("type2_outputs");
  const auto msps = msps_of(g, M, 2);
  std::vector<VertexId> zs;
  for (const auto& [d, sp] : msps) zs.insert(zs.end(), sp->out.begin(), sp->out.end());
  if (zs.empty()) {
    rec.note("no Type 2 MSPs for M=" + std::to_string(M));
    return rec.take();
  }
  const std::vector<VertexId> sources = g.global_inputs();
  const std::size_t kmax = static_cast<std::size_t>(std::min<std::uint64_t>(4 * M, zs.size()));
  auto run = [&](const std::vector<std::size_t>& idx, const std::string& what) {
    std::vector<VertexId> z;
    for (const std::size_t i : idx) z.push_back(zs[i]);
    rec.check(what, z.size(), min_dominator_size(g, z, sources), static_cast<double>(z.size()) / 2.0);
  };
  if (subset_count(zs.size(), kmax) <= opt.exhaustive_limit) {
    for_each_subset(zs.size(), kmax, [&](const std::vector<std::size_t>& idx) { run(idx, "exhaustive"); });
    return rec.take();
  }
  std::size_t offset = 0;
  for (const auto& [d, sp] : msps) {
    std::vector<std::size_t> idx(std::min(kmax, sp->out.size()));
    std::iota(idx.begin(), idx.end(), offset);
    run(idx, "msp " + path_to_string(d.path) + " leading outputs");
    offset += sp->out.size();
  }
  std::mt19937_64 rng(opt.seed);
  for (std::size_t s = 0; s < opt.samples; ++s) run(random_subset(zs.size(), kmax, rng), "random");
  return rec.take();
}

LemmaReport verify_dominator_lemma_type1_inputs(const Cdag& g, std::uint64_t M, const LemmaOptions& opt) {
  Recorder rec("type1_inputs");
  const auto msps = msps_of(g, M, 1);
  std::vector<VertexId> ys;
  std::vector<std::size_t> owner;
  for (std::size_t i = 0; i < msps.size(); ++i) {
    for (const VertexId v : msps[i].second->a_in) {
      ys.push_back(v);
      owner.push_back(i);
    }
    for (const VertexId v : msps[i].second->b_in) {
      ys.push_back(v);
      owner.push_back(i);
    }
  }
  if (ys.empty()) {
    rec.note("no Type 1 MSPs for M=" + std::to_string(M));
    return rec.take();
  }
  const std::vector<VertexId> sources = g.global_inputs();
  auto run = [&](const std::vector<std::size_t>& idx, const std::string& what) {
    std::vector<VertexId> y;
    std::vector<double> per(msps.size(), 0.0);
    for (const std::size_t i : idx) {
      y.push_back(ys[i]);
      per[owner[i]] += 1;
    }
    double sq = 0;
    for (const double c : per) sq += c * c;
    const double bound = std::min(2.0 * static_cast<double>(M), std::sqrt(sq));
    rec.check(what, y.size(), min_dominator_size(g, y, sources), bound);
  };
  if (subset_count(ys.size(), ys.size()) <= opt.exhaustive_limit) {
    for_each_subset(ys.size(), ys.size(), [&](const std::vector<std::size_t>& idx) { run(idx, "exhaustive"); });
    return rec.take();
  }
  std::size_t offset = 0;
  for (const auto& [d, sp] : msps) {
    const std::size_t cnt = sp->a_in.size() + sp->b_in.size();
    std::vector<std::size_t> idx(cnt);
    std::iota(idx.begin(), idx.end(), offset);
    run(idx, "msp " + path_to_string(d.path) + " all inputs");
    offset += cnt;
  }
  // Entry (0,0) of A and of B in every MSP: encoded from the same few global inputs.
  {
    std::vector<std::size_t> idx;
    offset = 0;
    for (const auto& [d, sp] : msps) {
      idx.push_back(offset);
      idx.push_back(offset + sp->a_in.size());
      offset += sp->a_in.size() + sp->b_in.size();
    }
    run(idx, "leading entry of every msp");
  }
  std::mt19937_64 rng(opt.seed);
  for (std::size_t s = 0; s < opt.samples; ++s) run(random_subset(ys.size(), ys.size(), rng), "random");
  return rec.take();
}

LemmaReport verify_dominator_lemma_type1_products(const Cdag& g, std::uint64_t M, const LemmaOptions& opt) {
  Recorder rec("type1_products");
  const auto msps = msps_of(g, M, 1);
  if (msps.empty()) {
    rec.note("no Type 1 MSPs for M=" + std::to_string(M));
    return rec.take();
  }
  std::mt19937_64 rng(opt.seed);
  for (const auto& [d, sp] : msps) {
    std::vector<VertexId> sources = sp->a_in;
    sources.insert(sources.end(), sp->b_in.begin(), sp->b_in.end());
    const auto& prods = sp->products;
    const std::string where = "msp " + path_to_string(d.path);
    auto run = [&](const std::vector<std::size_t>& idx, const std::string& what) {
      std::vector<VertexId> t;
      std::set<std::pair<std::uint32_t, std::uint32_t>> ya, yb;
      for (const std::size_t i : idx) {
        t.push_back(prods[i].vertex);
        ya.emplace(prods[i].i, prods[i].k);
        yb.emplace(prods[i].k, prods[i].j);
      }
      const double bound = static_cast<double>(std::max(ya.size(), yb.size()));
      rec.check(where + " " + what, t.size(), min_dominator_size(g, t, sources), bound);
    };
    if (subset_count(prods.size(), prods.size()) <= opt.exhaustive_limit) {
      for_each_subset(prods.size(), prods.size(), [&](const std::vector<std::size_t>& idx) { run(idx, "exhaustive"); });
      continue;
    }
    const std::size_t s = sp->size;
    // Products are stored in (i, j, k) order.
    for (std::size_t c = 0; c < s * s; ++c) {
      std::vector<std::size_t> idx(s);
      std::iota(idx.begin(), idx.end(), c * s);
      run(idx, "products of one output");
    }
    for (std::size_t i = 0; i < s; ++i) {
      std::vector<std::size_t> idx(s * s);
      std::iota(idx.begin(), idx.end(), i * s * s);
      run(idx, "products of one output row");
    }
    for (std::size_t p = 0; p < std::min<std::size_t>(prods.size(), 64); ++p) run({p}, "single product");
    for (std::size_t n = 0; n < opt.samples; ++n) run(random_subset(prods.size(), prods.size(), rng), "random");
  }
  return rec.take();
}

LemmaReport verify_dominator_lemma_type1(const Cdag& g, std::uint64_t M, const LemmaOptions& opt) {
  LemmaReport out;
  out.lemma = "type1";
  for (const LemmaReport& r : {verify_dominator_lemma_type1_inputs(g, M, opt), verify_dominator_lemma_type1_products(g, M, opt)}) {
    if (r.checked > 0) out.min_ratio = out.checked == 0 ? r.min_ratio : std::min(out.min_ratio, r.min_ratio);
    out.checked += r.checked;
    out.violations += r.violations;
    out.failures.insert(out.failures.end(), r.failures.begin(), r.failures.end());
    out.notes.insert(out.notes.end(), r.notes.begin(), r.notes.end());
  }
  return out;
}

std::string lemma_report_to_json(const LemmaReport& r) {
  nlohmann::ordered_json j;
  j["lemma"] = r.lemma;
  j["checked"] = r.checked;
  j["violations"] = r.violations;
  j["min_ratio"] = r.min_ratio;
  j["pass"] = r.pass();
  auto& f = j["failures"] = nlohmann::ordered_json::array();
  for (const DominatorSample& s : r.failures)
    f.push_back({{"detail", s.detail}, {"subset_size", s.subset_size}, {"min_dominator", s.min_dominator}, {"bound", s.bound}});
  j["notes"] = r.notes;
  return j.dump(2);
}

}  // namespace hybridmm
