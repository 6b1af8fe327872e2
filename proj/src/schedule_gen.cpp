#include "hybridmm/schedule_gen.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "hybridmm/matrix.hpp"

namespace hybridmm {

namespace {

using u64 = std::uint64_t;

u64 ceil_div(u64 a, u64 b) { return (a + b - 1) / b; }

// s x s window of slow memory (or of cache slot names) with row stride ld.
struct View {
  u64 base = 0;
  u64 ld = 0;
  std::size_t s = 0;

  u64 at(std::size_t i, std::size_t j) const { return base + i * ld + j; }
  u64 flat(std::size_t o) const { return at(o / s, o % s); }
  bool contiguous() const { return ld == s; }
  View sub(std::size_t r0, std::size_t c0, std::size_t t) const { return {at(r0, c0), ld, t}; }
  View quad(int q) const {
    const std::size_t h = s / 2;
    return sub(static_cast<std::size_t>(q / 2) * h, static_cast<std::size_t>(q % 2) * h, h);
  }
  friend bool operator==(const View&, const View&) = default;
};

View dense(u64 base, std::size_t s) { return {base, s, s}; }

struct Term {
  int sign = 1;
  View v;
};

// Lazy signed sum of equally sized views; positive terms first.
using Operand = std::vector<Term>;

bool is_plain(const Operand& x) { return x.size() == 1 && x[0].sign > 0; }

Operand compose(const Operand& x, const std::array<std::int8_t, 4>& row) {
  Operand out;
  for (const Term& t : x)
    for (int q = 0; q < 4; ++q)
      if (row[static_cast<std::size_t>(q)] != 0) out.push_back({t.sign * row[static_cast<std::size_t>(q)], t.v.quad(q)});
  std::stable_partition(out.begin(), out.end(), [](const Term& t) { return t.sign > 0; });
  return out;
}

int row_nnz(const std::array<std::int8_t, 4>& row) {
  return static_cast<int>(std::count_if(row.begin(), row.end(), [](std::int8_t v) { return v != 0; }));
}

bool row_bare(const std::array<std::int8_t, 4>& row) { return row_nnz(row) == 1 && *std::max_element(row.begin(), row.end()) == 1; }

int bare_quadrant(const std::array<std::int8_t, 4>& row) {
  if (!row_bare(row)) return -1;
  return static_cast<int>(std::find(row.begin(), row.end(), 1) - row.begin());
}

// Calls f(offset, len) over the s x s index space in pieces of at most c
// entries; pieces cross row boundaries only when `flat`.
template <typename F>
void for_segments(std::size_t s, u64 c, bool flat, F&& f) {
  if (flat) {
    const u64 total = static_cast<u64>(s) * s;
    for (u64 o = 0; o < total; o += c) f(static_cast<std::size_t>(o), static_cast<std::size_t>(std::min(c, total - o)));
    return;
  }
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; j += c) f(i * s + j, static_cast<std::size_t>(std::min<u64>(c, s - j)));
}

enum class Mode : std::uint8_t { InCache, LeafPartial, FastPartial, Blocked, Streamed };

struct Decision {
  Mode mode = Mode::Blocked;
  bool mat_a = true;
  bool mat_b = true;
  u64 cost = 0;
};

// Layout of a streaming pass that turns linear combinations of four input
// quadrants (or seven products) into several outputs.
struct PassPlan {
  bool shared = false;
  u64 chunk = 1;
  u64 cost = 0;
};

constexpr int kMaxLazyTerms = 4;

class Generator {
 public:
  Generator(MachineConfig cfg, MoveSink& sink) : cfg_(cfg), sink_(sink) {}

  void begin(std::size_t n, u64 temp_words) {
    layout_ = MemoryLayout::for_product(n, temp_words);
    stack_top_ = layout_.temp_base();
    sink_.begin(layout_);
  }

  View a_view() const { return dense(layout_.a_base(), layout_.n); }
  View b_view() const { return dense(layout_.b_base(), layout_.n); }
  View c_view() const { return dense(layout_.c_base(), layout_.n); }

  void blocked(View A, View B, View C);
  void run(const RecursionPlan& p, const Operand& a, const Operand& b, View c);

 private:
  // --- primitive moves -----------------------------------------------------
  // While a program is being captured, evictions are left to flush().
  void put(const Move& m) {
    if (capture_)
      capture_->push_back(m);
    else
      sink_.emit(m);
  }
  void read(u64 a, std::size_t k) { put(Move::read(a, static_cast<std::uint32_t>(k))); }
  void write(u64 a, std::size_t k) { put(Move::write(a, static_cast<std::uint32_t>(k))); }
  void evict(u64 a) {
    if (!capture_) sink_.emit(Move::evict(a));
  }
  void op(u64 out, Op o, u64 s0, u64 s1 = 0, u64 s2 = 0) { put(Move::compute(out, o, s0, s1, s2)); }

  u64 block() const { return cfg_.B; }

  void load(View v) {
    for_segments(v.s, std::min<u64>(block(), v.contiguous() ? u64{v.s} * v.s : v.s), v.contiguous(),
                 [&](std::size_t o, std::size_t len) { read(v.flat(o), len); });
  }
  void store(View v) {
    for_segments(v.s, std::min<u64>(block(), v.contiguous() ? u64{v.s} * v.s : v.s), v.contiguous(),
                 [&](std::size_t o, std::size_t len) { write(v.flat(o), len); });
  }
  void evict_view(View v) {
    for (std::size_t i = 0; i < v.s; ++i)
      for (std::size_t j = 0; j < v.s; ++j) evict(v.at(i, j));
  }

  // target := sum of signed slots; all slots resident.
  void combine(u64 target, std::vector<std::pair<int, u64>> terms);

  // Loads entries [o, o+len) of x into slots tv.flat(to + t). When x is a
  // single term and tv is that term's view, the load is in place.
  void fused_into(const Operand& x, std::size_t o, std::size_t len, View tv, std::size_t to);

  // --- stack of temporary addresses ------------------------------------------
  u64 alloc(u64 words) {
    const u64 a = stack_top_;
    stack_top_ += words;
    if (!dry_ && stack_top_ > layout_.total_words) throw std::logic_error("schedule generator: temporary region exhausted");
    return a;
  }
  u64 mark() const { return stack_top_; }
  void release(u64 m) { stack_top_ = m; }

  // --- strategy selection ------------------------------------------------------
  u64 rows_cost(std::size_t s, u64 c) const { return s * ceil_div(s, std::min<u64>(c, s)); }
  u64 view_cost(std::size_t s) const { return rows_cost(s, block()); }
  struct ProgramCost {
    u64 peak = 0;
    u64 io = 0;
  };
  ProgramCost measure(const std::vector<Move>& prog) const;
  void flush(const std::vector<Move>& prog);
  ProgramCost dry_run(Mode mode, const RecursionPlan& p, std::size_t wa, std::size_t wb);
  const std::vector<std::array<int, 7>>& candidate_orders(const FastScheme& sc);
  std::array<int, 7> product_order(const RecursionPlan& p);
  u64 blocked_cost(std::size_t s) const;
  PassPlan encode_pass(const FastScheme::EncodeMatrix& E, std::size_t w, std::size_t h) const;
  PassPlan decode_pass(const FastScheme::DecodeMatrix& D, std::size_t h) const;
  const Decision& decide(const RecursionPlan& p, std::size_t wa, std::size_t wb);

  // --- strategies ----------------------------------------------------------
  View load_resident(const Operand& x);
  void materialize(const Operand& x, View target);
  void encode_streamed(const Operand& x, const FastScheme::EncodeMatrix& E, const PassPlan& pp,
                       std::array<Operand, 7>& children);
  void decode_streamed(const FastScheme::DecodeMatrix& D, const std::array<View, 7>& m, View c, const PassPlan& pp);
  void resident(const RecursionPlan& p, View sa, View sb, View sc);
  View encoded(const std::array<std::int8_t, 4>& row, View src);
  void resident_product(const RecursionPlan& p, int k, View ak, View bk, View sc, std::array<bool, 4>& started);
  void build(Mode mode, const RecursionPlan& p, const Operand& a, const Operand& b, View c);
  void build_incache(const RecursionPlan& p, const Operand& a, const Operand& b, View c);
  void build_leaf_partial(const Operand& a, const Operand& b, View c);
  void build_fast_partial(const RecursionPlan& p, const Operand& a, const Operand& b, View c);
  void run_blocked_leaf(const Operand& a, const Operand& b, View c);
  void run_streamed(const RecursionPlan& p, const Decision& d, const Operand& a, const Operand& b, View c);

  MachineConfig cfg_;
  MoveSink& sink_;
  MemoryLayout layout_;
  u64 stack_top_ = 0;
  std::vector<Move>* capture_ = nullptr;
  bool dry_ = false;
  std::map<const FastScheme*, std::vector<std::array<int, 7>>> candidates_;
  std::unordered_map<const void*, std::array<int, 7>> orders_;
  std::map<std::tuple<const void*, std::size_t, std::size_t>, Decision> decisions_;
};

void Generator::combine(u64 target, std::vector<std::pair<int, u64>> terms) {
  std::stable_partition(terms.begin(), terms.end(), [](const auto& t) { return t.first > 0; });
  if (terms.size() == 1) {
    op(target, terms[0].first > 0 ? Op::Copy : Op::Neg, terms[0].second);
    return;
  }
  const auto [s0, x0] = terms[0];
  const auto [s1, x1] = terms[1];
  if (s0 > 0) {
    op(target, s1 > 0 ? Op::Add : Op::Sub, x0, x1);
  } else {
    op(target, Op::Neg, x0);
    op(target, Op::Sub, target, x1);
  }
  for (std::size_t i = 2; i < terms.size(); ++i)
    op(target, terms[i].first > 0 ? Op::Add : Op::Sub, target, terms[i].second);
}

void Generator::fused_into(const Operand& x, std::size_t o, std::size_t len, View tv, std::size_t to) {
  auto target = [&](std::size_t t) { return tv.flat(to + t); };
  auto src = [&](std::size_t i, std::size_t t) { return x[i].v.flat(o) + t; };
  auto drop = [&](std::size_t i) {
    for (std::size_t t = 0; t < len; ++t) evict(src(i, t));
  };
  read(x[0].v.flat(o), len);
  if (x.size() == 1) {
    const bool in_place = x[0].v == tv && to == o;
    if (in_place) {
      if (x[0].sign < 0)
        for (std::size_t t = 0; t < len; ++t) op(target(t), Op::Neg, target(t));
      return;
    }
    for (std::size_t t = 0; t < len; ++t) op(target(t), x[0].sign > 0 ? Op::Copy : Op::Neg, src(0, t));
    drop(0);
    return;
  }
  read(x[1].v.flat(o), len);
  for (std::size_t t = 0; t < len; ++t) combine(target(t), {{x[0].sign, src(0, t)}, {x[1].sign, src(1, t)}});
  drop(0);
  drop(1);
  for (std::size_t i = 2; i < x.size(); ++i) {
    read(x[i].v.flat(o), len);
    for (std::size_t t = 0; t < len; ++t) op(target(t), x[i].sign > 0 ? Op::Add : Op::Sub, target(t), src(i, t));
    drop(i);
  }
}

// --- strategy selection --------------------------------------------------------

namespace {

// Peak occupancy, in quadrant units, of an in-cache fast step that performs
// the products in `order` and drops each input quadrant after its last use.
int order_peak(const FastScheme& sc, const std::array<int, 7>& order) {
  std::array<int, 4> last_a{-1, -1, -1, -1}, last_b{-1, -1, -1, -1};
  for (int i = 0; i < 7; ++i) {
    const auto k = static_cast<std::size_t>(order[static_cast<std::size_t>(i)]);
    for (std::size_t q = 0; q < 4; ++q) {
      if (sc.encode_a[k][q] != 0) last_a[q] = i;
      if (sc.encode_b[k][q] != 0) last_b[q] = i;
    }
  }
  std::array<bool, 4> alive_a{true, true, true, true}, alive_b{true, true, true, true}, started{};
  int res = 8, nstarted = 0, peak = 8;
  auto retire = [&](std::array<bool, 4>& alive, const std::array<int, 4>& last, int i) {
    for (std::size_t q = 0; q < 4; ++q)
      if (alive[q] && last[q] <= i) {
        alive[q] = false;
        --res;
      }
  };
  for (int i = 0; i < 7; ++i) {
    const auto k = static_cast<std::size_t>(order[static_cast<std::size_t>(i)]);
    const bool bare_a = row_bare(sc.encode_a[k]), bare_b = row_bare(sc.encode_b[k]);
    const int ta = bare_a ? 0 : 1, tb = bare_b ? 0 : 1;
    peak = std::max(peak, res + nstarted + ta);
    if (!bare_a) retire(alive_a, last_a, i);
    peak = std::max(peak, res + nstarted + ta + tb);
    if (!bare_b) retire(alive_b, last_b, i);
    int fresh = -1;
    for (std::size_t q = 0; q < 4 && fresh < 0; ++q)
      if (sc.decode[q][k] == 1 && !started[q]) fresh = static_cast<int>(q);
    const int out = fresh >= 0 ? 0 : 1;
    if (fresh >= 0) {
      started[static_cast<std::size_t>(fresh)] = true;
      ++nstarted;
    }
    peak = std::max(peak, res + nstarted + ta + tb + out);
    retire(alive_a, last_a, i);
    retire(alive_b, last_b, i);
    for (std::size_t q = 0; q < 4; ++q)
      if (sc.decode[q][k] != 0 && !started[q]) {
        started[q] = true;
        ++nstarted;
      }
    peak = std::max(peak, res + nstarted + out);
  }
  return peak;
}

// Pairs (move index, slot) such that the slot holds a value that is not
// read after that move.
std::vector<std::pair<std::size_t, u64>> last_uses(const std::vector<Move>& prog) {
  std::unordered_set<u64> live;
  std::vector<std::pair<std::size_t, u64>> out;
  for (std::size_t i = prog.size(); i-- > 0;) {
    const Move& m = prog[i];
    switch (m.kind) {
      case MoveKind::Compute: {
        const bool result_live = live.erase(m.addr) > 0;
        if (!result_live) out.emplace_back(i, m.addr);
        for (int t = 0; t < op_arity(m.op); ++t) {
          const u64 x = m.operands[static_cast<std::size_t>(t)];
          if (live.insert(x).second && x != m.addr) out.emplace_back(i, x);
        }
        break;
      }
      case MoveKind::Write:
        for (u64 x = m.addr; x < m.addr + m.count; ++x)
          if (live.insert(x).second) out.emplace_back(i, x);
        break;
      case MoveKind::Read:
        for (u64 x = m.addr; x < m.addr + m.count; ++x)
          if (live.erase(x) == 0) out.emplace_back(i, x);
        break;
      case MoveKind::Evict:
        break;
    }
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace

const std::vector<std::array<int, 7>>& Generator::candidate_orders(const FastScheme& sc) {
  if (auto it = candidates_.find(&sc); it != candidates_.end()) return it->second;
  std::array<int, 7> perm{0, 1, 2, 3, 4, 5, 6};
  std::vector<std::array<int, 7>> best;
  int best_peak = std::numeric_limits<int>::max();
  do {
    const int pk = order_peak(sc, perm);
    if (pk < best_peak) {
      best_peak = pk;
      best.clear();
    }
    if (pk == best_peak) best.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return candidates_.emplace(&sc, std::move(best)).first->second;
}

// Among the orders that are best at quadrant granularity, picks the one whose
// in-cache program has the smallest exact peak.
std::array<int, 7> Generator::product_order(const RecursionPlan& p) {
  if (auto it = orders_.find(p.node_id()); it != orders_.end()) return it->second;
  const auto& cands = candidate_orders(p.scheme());
  const u64 area = u64{p.size()} * p.size();
  std::array<int, 7> best = cands.front();
  if (cands.size() > 1 && 2 * area <= cfg_.M) {
    u64 best_peak = ~u64{0};
    for (const auto& order : cands) {
      orders_[p.node_id()] = order;
      const u64 pk = dry_run(Mode::InCache, p, 1, 1).peak;
      if (pk < best_peak) {
        best_peak = pk;
        best = order;
      }
    }
  }
  orders_[p.node_id()] = best;
  return best;
}

Generator::ProgramCost Generator::measure(const std::vector<Move>& prog) const {
  const auto drops = last_uses(prog);
  std::unordered_set<u64> cache;
  ProgramCost cost;
  std::size_t d = 0;
  for (std::size_t i = 0; i < prog.size(); ++i) {
    const Move& m = prog[i];
    if (m.kind == MoveKind::Read) {
      ++cost.io;
      for (u64 x = m.addr; x < m.addr + m.count; ++x) cache.insert(x);
    } else if (m.kind == MoveKind::Write) {
      ++cost.io;
    } else if (m.kind == MoveKind::Compute) {
      cache.insert(m.addr);
    }
    cost.peak = std::max<u64>(cost.peak, cache.size());
    for (; d < drops.size() && drops[d].first == i; ++d) cache.erase(drops[d].second);
  }
  return cost;
}

void Generator::flush(const std::vector<Move>& prog) {
  const auto drops = last_uses(prog);
  std::size_t d = 0;
  for (std::size_t i = 0; i < prog.size(); ++i) {
    sink_.emit(prog[i]);
    for (; d < drops.size() && drops[d].first == i; ++d) sink_.emit(Move::evict(drops[d].second));
  }
}

Generator::ProgramCost Generator::dry_run(Mode mode, const RecursionPlan& p, std::size_t wa, std::size_t wb) {
  const std::size_t s = p.size();
  const u64 saved_top = stack_top_;
  u64 base = u64{1} << 40;
  auto operand = [&](std::size_t w) {
    Operand x;
    for (std::size_t t = 0; t < w; ++t) {
      x.push_back({1, View{base, 2 * u64{s}, s}});
      base += 4 * u64{s} * s;
    }
    return x;
  };
  const Operand a = operand(wa);
  const Operand b = operand(wb);
  const View c{base, 2 * u64{s}, s};
  std::vector<Move> prog;
  std::vector<Move>* const outer = capture_;
  const bool outer_dry = dry_;
  capture_ = &prog;
  dry_ = true;
  build(mode, p, a, b, c);
  capture_ = outer;
  dry_ = outer_dry;
  stack_top_ = saved_top;
  return measure(prog);
}

u64 Generator::blocked_cost(std::size_t s) const {
  const std::size_t t = blocked_tile(s, cfg_.M);
  const u64 nt = s / t;
  return nt * nt * nt * 2 * rows_cost(t, block()) + nt * nt * rows_cost(t, block());
}

PassPlan Generator::encode_pass(const FastScheme::EncodeMatrix& E, std::size_t w, std::size_t h) const {
  u64 nnz = 0, outs = 0;
  std::array<bool, 4> needed{};
  for (const auto& row : E) {
    if (row_bare(row)) continue;
    ++outs;
    nnz += static_cast<u64>(row_nnz(row));
    for (int q = 0; q < 4; ++q) needed[static_cast<std::size_t>(q)] |= row[static_cast<std::size_t>(q)] != 0;
  }
  if (outs == 0) return {false, 1, 0};
  const u64 nq = static_cast<u64>(std::count(needed.begin(), needed.end(), true));
  const u64 c_pd = std::max<u64>(1, std::min<u64>({block(), h, cfg_.M / 3}));
  PassPlan best{false, c_pd, (nnz * w + outs) * rows_cost(h, c_pd)};
  const u64 c_sh = std::min<u64>({block(), h, cfg_.M / (nq + 1 + (w > 1 ? 2 : 0))});
  if (c_sh >= 1) {
    const u64 cost = (nq * w + outs) * rows_cost(h, c_sh);
    if (cost <= best.cost) best = {true, c_sh, cost};
  }
  return best;
}

PassPlan Generator::decode_pass(const FastScheme::DecodeMatrix& D, std::size_t h) const {
  u64 nnz = 0, used = 0;
  for (int k = 0; k < 7; ++k) {
    bool any = false;
    for (int q = 0; q < 4; ++q) {
      const bool nz = D[static_cast<std::size_t>(q)][static_cast<std::size_t>(k)] != 0;
      nnz += nz;
      any |= nz;
    }
    used += any;
  }
  const u64 c_pd = std::max<u64>(1, std::min<u64>({block(), h, cfg_.M / 3}));
  PassPlan best{false, c_pd, (nnz + 4) * rows_cost(h, c_pd)};
  const u64 c_sh = std::min<u64>({block(), h, cfg_.M / (used + 1)});
  if (c_sh >= 1) {
    const u64 cost = (used + 4) * rows_cost(h, c_sh);
    if (cost <= best.cost) best = {true, c_sh, cost};
  }
  return best;
}

const Decision& Generator::decide(const RecursionPlan& p, std::size_t wa, std::size_t wb) {
  const auto key = std::make_tuple(p.node_id(), wa, wb);
  if (auto it = decisions_.find(key); it != decisions_.end()) return it->second;

  const std::size_t s = p.size();
  Decision best;
  best.cost = ~u64{0};
  auto consider = [&](Decision d) {
    if (d.cost < best.cost) best = d;
  };
  auto program = [&](Mode mode) {
    const ProgramCost pc = dry_run(mode, p, wa, wb);
    if (pc.peak <= cfg_.M) consider({mode, false, false, pc.io});
  };
  const u64 area = u64{s} * s;
  if (2 * area <= cfg_.M) program(Mode::InCache);
  if (p.is_leaf()) {
    if (area < cfg_.M) program(Mode::LeafPartial);
    const u64 flat_cost = rows_cost(s, std::max<u64>(1, std::min<u64>(block(), cfg_.M / 3)));
    u64 cost = blocked_cost(s);
    if (wa != 1) cost += (wa + 1) * flat_cost;
    if (wb != 1) cost += (wb + 1) * flat_cost;
    consider({Mode::Blocked, true, true, cost});
  } else {
    const FastScheme& sc = p.scheme();
    const std::size_t h = s / 2;
    if (area < cfg_.M) program(Mode::FastPartial);
    const u64 dec = decode_pass(sc.decode, h).cost;
    for (bool mat_a : {true, false})
      for (bool mat_b : {true, false}) {
        u64 cost = dec;
        if (mat_a) cost += encode_pass(sc.encode_a, wa, h).cost;
        if (mat_b) cost += encode_pass(sc.encode_b, wb, h).cost;
        bool ok = true;
        for (int k = 0; k < 7 && ok; ++k) {
          const auto child_w = [&](bool mat, const std::array<std::int8_t, 4>& row, std::size_t w) -> std::size_t {
            if (mat) return row_bare(row) ? w : 1;
            return static_cast<std::size_t>(row_nnz(row)) * w;
          };
          const std::size_t wak = child_w(mat_a, sc.encode_a[k], wa);
          const std::size_t wbk = child_w(mat_b, sc.encode_b[k], wb);
          if (wak > kMaxLazyTerms || wbk > kMaxLazyTerms) {
            ok = false;
            break;
          }
          cost += decide(p.child(k), wak, wbk).cost;
        }
        if (ok) consider({Mode::Streamed, mat_a, mat_b, cost});
      }
  }
  return decisions_.emplace(key, best).first->second;
}

// --- strategies ------------------------------------------------------------------

View Generator::load_resident(const Operand& x) {
  const std::size_t s = x[0].v.s;
  if (x.size() == 1) {
    const View v = x[0].v;
    load(v);
    if (x[0].sign < 0)
      for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < s; ++j) op(v.at(i, j), Op::Neg, v.at(i, j));
    return v;
  }
  const View tv = dense(alloc(u64{s} * s), s);
  for_segments(s, std::min<u64>(block(), s), false,
               [&](std::size_t o, std::size_t len) { fused_into(x, o, len, tv, o); });
  return tv;
}

void Generator::materialize(const Operand& x, View target) {
  const std::size_t s = target.s;
  const u64 c = std::max<u64>(1, std::min<u64>({block(), s, cfg_.M / 3}));
  for_segments(s, c, false, [&](std::size_t o, std::size_t len) {
    fused_into(x, o, len, target, o);
    write(target.flat(o), len);
    for (std::size_t t = 0; t < len; ++t) evict(target.flat(o) + t);
  });
}

void Generator::encode_streamed(const Operand& x, const FastScheme::EncodeMatrix& E, const PassPlan& pp,
                                std::array<Operand, 7>& children) {
  const std::size_t h = x[0].v.s / 2;
  std::array<View, 7> targets{};
  std::vector<int> rows;
  std::array<bool, 4> needed{};
  for (int k = 0; k < 7; ++k) {
    const auto& row = E[static_cast<std::size_t>(k)];
    if (row_bare(row)) {
      children[static_cast<std::size_t>(k)] = compose(x, row);
      continue;
    }
    rows.push_back(k);
    targets[static_cast<std::size_t>(k)] = dense(alloc(u64{h} * h), h);
    children[static_cast<std::size_t>(k)] = {{1, targets[static_cast<std::size_t>(k)]}};
    for (int q = 0; q < 4; ++q) needed[static_cast<std::size_t>(q)] |= row[static_cast<std::size_t>(q)] != 0;
  }
  if (rows.empty()) return;
  if (!pp.shared) {
    for (int k : rows) materialize(compose(x, E[static_cast<std::size_t>(k)]), targets[static_cast<std::size_t>(k)]);
    return;
  }
  const u64 m = mark();
  const u64 c = pp.chunk;
  std::array<Operand, 4> quads;
  std::array<u64, 4> vbase{};
  for (int q = 0; q < 4; ++q) {
    if (!needed[static_cast<std::size_t>(q)]) continue;
    std::array<std::int8_t, 4> unit{};
    unit[static_cast<std::size_t>(q)] = 1;
    quads[static_cast<std::size_t>(q)] = compose(x, unit);
    if (quads[static_cast<std::size_t>(q)].size() > 1) vbase[static_cast<std::size_t>(q)] = alloc(c);
  }
  for_segments(h, c, false, [&](std::size_t o, std::size_t len) {
    std::array<std::vector<u64>, 4> slot;
    for (int q = 0; q < 4; ++q) {
      const Operand& xq = quads[static_cast<std::size_t>(q)];
      if (xq.empty()) continue;
      auto& sl = slot[static_cast<std::size_t>(q)];
      if (xq.size() == 1) {
        fused_into(xq, o, len, xq[0].v, o);
        for (std::size_t t = 0; t < len; ++t) sl.push_back(xq[0].v.flat(o) + t);
      } else {
        const View tv = dense(vbase[static_cast<std::size_t>(q)], c);
        fused_into(xq, o, len, tv, 0);
        for (std::size_t t = 0; t < len; ++t) sl.push_back(tv.flat(t));
      }
    }
    for (int k : rows) {
      const auto& row = E[static_cast<std::size_t>(k)];
      const View tk = targets[static_cast<std::size_t>(k)];
      for (std::size_t t = 0; t < len; ++t) {
        std::vector<std::pair<int, u64>> terms;
        for (int q = 0; q < 4; ++q)
          if (row[static_cast<std::size_t>(q)] != 0)
            terms.emplace_back(row[static_cast<std::size_t>(q)], slot[static_cast<std::size_t>(q)][t]);
        combine(tk.flat(o) + t, std::move(terms));
      }
      write(tk.flat(o), len);
      for (std::size_t t = 0; t < len; ++t) evict(tk.flat(o) + t);
    }
    for (const auto& sl : slot)
      for (u64 a : sl) evict(a);
  });
  release(m);
}

void Generator::decode_streamed(const FastScheme::DecodeMatrix& D, const std::array<View, 7>& m, View c,
                                const PassPlan& pp) {
  if (!pp.shared) {
    for (int q = 0; q < 4; ++q) {
      Operand y;
      for (int k = 0; k < 7; ++k) {
        const int d = D[static_cast<std::size_t>(q)][static_cast<std::size_t>(k)];
        if (d != 0) y.push_back({d, m[static_cast<std::size_t>(k)]});
      }
      std::stable_partition(y.begin(), y.end(), [](const Term& t) { return t.sign > 0; });
      materialize(y, c.quad(q));
    }
    return;
  }
  const std::size_t h = c.s / 2;
  std::array<bool, 7> used{};
  for (int k = 0; k < 7; ++k)
    for (int q = 0; q < 4; ++q) used[static_cast<std::size_t>(k)] |= D[static_cast<std::size_t>(q)][static_cast<std::size_t>(k)] != 0;
  for_segments(h, pp.chunk, false, [&](std::size_t o, std::size_t len) {
    for (int k = 0; k < 7; ++k)
      if (used[static_cast<std::size_t>(k)]) read(m[static_cast<std::size_t>(k)].flat(o), len);
    for (int q = 0; q < 4; ++q) {
      const View cq = c.quad(q);
      for (std::size_t t = 0; t < len; ++t) {
        std::vector<std::pair<int, u64>> terms;
        for (int k = 0; k < 7; ++k) {
          const int d = D[static_cast<std::size_t>(q)][static_cast<std::size_t>(k)];
          if (d != 0) terms.emplace_back(d, m[static_cast<std::size_t>(k)].flat(o) + t);
        }
        combine(cq.flat(o) + t, std::move(terms));
      }
      write(cq.flat(o), len);
      for (std::size_t t = 0; t < len; ++t) evict(cq.flat(o) + t);
    }
    for (int k = 0; k < 7; ++k)
      if (used[static_cast<std::size_t>(k)])
        for (std::size_t t = 0; t < len; ++t) evict(m[static_cast<std::size_t>(k)].flat(o) + t);
  });
}

void Generator::resident_product(const RecursionPlan& p, int k, View ak, View bk, View sc, std::array<bool, 4>& started) {
  const FastScheme& sch = p.scheme();
  const auto& D = sch.decode;
  const auto kk = static_cast<std::size_t>(k);
  const std::size_t h = sc.s / 2;
  int fresh = -1;
  for (std::size_t q = 0; q < 4 && fresh < 0; ++q)
    if (D[q][kk] == 1 && !started[q]) fresh = static_cast<int>(q);
  const View mk = fresh >= 0 ? sc.quad(fresh) : dense(alloc(u64{h} * h), h);
  resident(p.child(k), ak, bk, mk);
  if (fresh >= 0) started[static_cast<std::size_t>(fresh)] = true;
  for (int q = 0; q < 4; ++q) {
    const int d = D[static_cast<std::size_t>(q)][kk];
    if (d == 0 || q == fresh) continue;
    const View cq = sc.quad(q);
    const bool first = !started[static_cast<std::size_t>(q)];
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < h; ++j) {
        if (first)
          op(cq.at(i, j), d > 0 ? Op::Copy : Op::Neg, mk.at(i, j));
        else
          op(cq.at(i, j), d > 0 ? Op::Add : Op::Sub, cq.at(i, j), mk.at(i, j));
      }
    started[static_cast<std::size_t>(q)] = true;
  }
}

View Generator::encoded(const std::array<std::int8_t, 4>& row, View src) {
  if (const int q = bare_quadrant(row); q >= 0) return src.quad(q);
  const std::size_t h = src.s / 2;
  const View t = dense(alloc(u64{h} * h), h);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < h; ++j) {
      std::vector<std::pair<int, u64>> terms;
      for (int q = 0; q < 4; ++q)
        if (row[static_cast<std::size_t>(q)] != 0) terms.emplace_back(row[static_cast<std::size_t>(q)], src.quad(q).at(i, j));
      combine(t.at(i, j), std::move(terms));
    }
  return t;
}

void Generator::resident(const RecursionPlan& p, View sa, View sb, View sc) {
  const std::size_t s = p.size();
  if (p.is_leaf()) {
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t j = 0; j < s; ++j) {
        op(sc.at(i, j), Op::Mul, sa.at(i, 0), sb.at(0, j));
        for (std::size_t k = 1; k < s; ++k) op(sc.at(i, j), Op::Mac, sc.at(i, j), sa.at(i, k), sb.at(k, j));
      }
    return;
  }
  const FastScheme& sch = p.scheme();
  std::array<bool, 4> started{};
  for (const int k : product_order(p)) {
    const u64 m = mark();
    const View ak = encoded(sch.encode_a[static_cast<std::size_t>(k)], sa);
    const View bk = encoded(sch.encode_b[static_cast<std::size_t>(k)], sb);
    resident_product(p, k, ak, bk, sc, started);
    release(m);
  }
}

void Generator::build(Mode mode, const RecursionPlan& p, const Operand& a, const Operand& b, View c) {
  const u64 m = mark();
  switch (mode) {
    case Mode::InCache:
      build_incache(p, a, b, c);
      break;
    case Mode::LeafPartial:
      build_leaf_partial(a, b, c);
      break;
    case Mode::FastPartial:
      build_fast_partial(p, a, b, c);
      break;
    default:
      throw std::logic_error("schedule generator: mode has no program form");
  }
  release(m);
}

void Generator::build_incache(const RecursionPlan& p, const Operand& a, const Operand& b, View c) {
  const View sa = load_resident(a);
  const View sb = load_resident(b);
  resident(p, sa, sb, c);
  store(c);
}

void Generator::build_leaf_partial(const Operand& a, const Operand& b, View c) {
  const View sa = load_resident(a);
  const std::size_t s = c.s;
  const u64 ch = std::min<u64>(block(), s);
  const bool in_place = b.size() == 1;
  const View vb = in_place ? View{} : dense(alloc(ch), ch);
  for (std::size_t k = 0; k < s; ++k)
    for (std::size_t j0 = 0; j0 < s; j0 += ch) {
      const std::size_t len = static_cast<std::size_t>(std::min<u64>(ch, s - j0));
      const std::size_t o = k * s + j0;
      auto slot = [&](std::size_t t) { return in_place ? b[0].v.flat(o) + t : vb.flat(t); };
      if (in_place)
        fused_into(b, o, len, b[0].v, o);
      else
        fused_into(b, o, len, vb, 0);
      for (std::size_t i = 0; i < s; ++i)
        for (std::size_t t = 0; t < len; ++t) {
          const u64 cij = c.at(i, j0 + t);
          if (k == 0)
            op(cij, Op::Mul, sa.at(i, k), slot(t));
          else
            op(cij, Op::Mac, cij, sa.at(i, k), slot(t));
        }
    }
  store(c);
}

void Generator::build_fast_partial(const RecursionPlan& p, const Operand& a, const Operand& b, View c) {
  const FastScheme& sch = p.scheme();
  const View sa = load_resident(a);
  std::array<bool, 4> started{};
  for (const int k : product_order(p)) {
    const u64 m = mark();
    const View bk = load_resident(compose(b, sch.encode_b[static_cast<std::size_t>(k)]));
    const View ak = encoded(sch.encode_a[static_cast<std::size_t>(k)], sa);
    resident_product(p, k, ak, bk, c, started);
    release(m);
  }
  store(c);
}

void Generator::run_blocked_leaf(const Operand& a, const Operand& b, View c) {
  const u64 m = mark();
  const std::size_t s = c.s;
  auto flat = [&](const Operand& x) {
    if (is_plain(x)) return x[0].v;
    const View t = dense(alloc(u64{s} * s), s);
    materialize(x, t);
    return t;
  };
  const View va = flat(a);
  const View vb = flat(b);
  blocked(va, vb, c);
  release(m);
}

void Generator::run_streamed(const RecursionPlan& p, const Decision& d, const Operand& a, const Operand& b,
                             View c) {
  const u64 m = mark();
  const FastScheme& sch = p.scheme();
  const std::size_t h = c.s / 2;
  std::array<Operand, 7> ca, cb;
  if (d.mat_a) {
    encode_streamed(a, sch.encode_a, encode_pass(sch.encode_a, a.size(), h), ca);
  } else {
    for (int k = 0; k < 7; ++k) ca[static_cast<std::size_t>(k)] = compose(a, sch.encode_a[static_cast<std::size_t>(k)]);
  }
  if (d.mat_b) {
    encode_streamed(b, sch.encode_b, encode_pass(sch.encode_b, b.size(), h), cb);
  } else {
    for (int k = 0; k < 7; ++k) cb[static_cast<std::size_t>(k)] = compose(b, sch.encode_b[static_cast<std::size_t>(k)]);
  }
  std::array<View, 7> mk;
  for (auto& v : mk) v = dense(alloc(u64{h} * h), h);
  for (int k = 0; k < 7; ++k)
    run(p.child(k), ca[static_cast<std::size_t>(k)], cb[static_cast<std::size_t>(k)], mk[static_cast<std::size_t>(k)]);
  decode_streamed(sch.decode, mk, c, decode_pass(sch.decode, h));
  release(m);
}

void Generator::run(const RecursionPlan& p, const Operand& a, const Operand& b, View c) {
  const Decision d = decide(p, a.size(), b.size());
  switch (d.mode) {
    case Mode::InCache:
    case Mode::LeafPartial:
    case Mode::FastPartial: {
      std::vector<Move> prog;
      capture_ = &prog;
      build(d.mode, p, a, b, c);
      capture_ = nullptr;
      flush(prog);
      break;
    }
    case Mode::Blocked:
      run_blocked_leaf(a, b, c);
      break;
    case Mode::Streamed:
      run_streamed(p, d, a, b, c);
      break;
  }
}

void Generator::blocked(View A, View B, View C) {
  const std::size_t s = A.s;
  const std::size_t t = blocked_tile(s, cfg_.M);
  const std::size_t nt = s / t;
  for (std::size_t I = 0; I < nt; ++I)
    for (std::size_t J = 0; J < nt; ++J) {
      const View ct = C.sub(I * t, J * t, t);
      for (std::size_t K = 0; K < nt; ++K) {
        const View at = A.sub(I * t, K * t, t);
        const View bt = B.sub(K * t, J * t, t);
        load(at);
        load(bt);
        for (std::size_t i = 0; i < t; ++i)
          for (std::size_t j = 0; j < t; ++j)
            for (std::size_t k = 0; k < t; ++k) {
              if (K == 0 && k == 0)
                op(ct.at(i, j), Op::Mul, at.at(i, k), bt.at(k, j));
              else
                op(ct.at(i, j), Op::Mac, ct.at(i, j), at.at(i, k), bt.at(k, j));
            }
        evict_view(at);
        evict_view(bt);
      }
      store(ct);
      evict_view(ct);
    }
}

void check_config(std::size_t n, MachineConfig cfg) {
  if (!is_pow2(n)) throw std::invalid_argument("schedule generator: n must be a power of two");
  if (cfg.M < 3) throw std::invalid_argument("schedule generator: M must be at least 3");
  if (cfg.B < 1) throw std::invalid_argument("schedule generator: B must be at least 1");
}

}  // namespace

std::size_t blocked_tile(std::size_t n, std::uint64_t M) {
  if (M < 3) return 0;
  std::size_t t = 1;
  while (2 * t <= n && 3 * u64{2 * t} * (2 * t) <= M) t *= 2;
  return t;
}

void gen_standard_blocked_schedule(std::size_t n, MachineConfig cfg, MoveSink& sink) {
  check_config(n, cfg);
  Generator g(cfg, sink);
  g.begin(n, 0);
  g.blocked(g.a_view(), g.b_view(), g.c_view());
}

Schedule gen_standard_blocked_schedule(std::size_t n, MachineConfig cfg) {
  Schedule s;
  gen_standard_blocked_schedule(n, cfg, s);
  return s;
}

void gen_hybrid_schedule(const RecursionPlan& plan, MachineConfig cfg, MoveSink& sink) {
  const std::size_t n = plan.size();
  check_config(n, cfg);
  Generator g(cfg, sink);
  const u64 n2 = u64{n} * n;
  g.begin(n, plan.is_leaf() ? 0 : 8 * n2 + std::min<u64>(2 * cfg.M, 4 * n2) + 64);
  if (plan.is_leaf()) {
    g.blocked(g.a_view(), g.b_view(), g.c_view());
    return;
  }
  g.run(plan, {{1, g.a_view()}}, {{1, g.b_view()}}, g.c_view());
}

Schedule gen_hybrid_schedule(const RecursionPlan& plan, MachineConfig cfg) {
  Schedule s;
  gen_hybrid_schedule(plan, cfg, s);
  return s;
}

}  // namespace hybridmm
