#include "hybridmm/engine.hpp"

#include <numeric>
#include <stdexcept>

namespace hybridmm {

namespace {

using Buf = std::vector<RingElem>;

// Row-major s x s operand with leading dimension ld.
struct CView {
  const RingElem* p;
  std::size_t ld;
  const RingElem& at(std::size_t i, std::size_t j) const { return p[i * ld + j]; }
};

void iterative(std::size_t s, CView a, CView b, RingElem* c, std::size_t ldc) {
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) {
      RingElem acc = a.at(i, 0) * b.at(0, j);
      for (std::size_t k = 1; k < s; ++k) acc += a.at(i, k) * b.at(k, j);
      c[i * ldc + j] = acc;
    }
}

// C := A*B by quadrant recursion; each quadrant of C is the sum of two half-size products.
void block_recursive(std::size_t s, CView a, CView b, RingElem* c, std::size_t ldc) {
  if (s == 1) {
    c[0] = a.at(0, 0) * b.at(0, 0);
    return;
  }
  const std::size_t h = s / 2;
  Buf t(h * h);
  for (std::size_t qi = 0; qi < 2; ++qi)
    for (std::size_t qj = 0; qj < 2; ++qj) {
      RingElem* cq = c + qi * h * ldc + qj * h;
      block_recursive(h, {a.p + qi * h * a.ld, a.ld}, {b.p + qj * h, b.ld}, cq, ldc);
      block_recursive(h, {a.p + qi * h * a.ld + h, a.ld}, {b.p + h * b.ld + qj * h, b.ld}, t.data(), h);
      for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < h; ++j) cq[i * ldc + j] += t[i * h + j];
    }
}

void leaf_multiply(StandardVariant v, std::size_t s, CView a, CView b, RingElem* c, std::size_t ldc) {
  if (v == StandardVariant::IterativeDef)
    iterative(s, a, b, c, ldc);
  else
    block_recursive(s, a, b, c, ldc);
}

// out := sum_q coeff[q] * quadrant q of the s x s view x.
void encode(const std::array<std::int8_t, 4>& coeff, std::size_t h, CView x, RingElem* out) {
  bool first = true;
  for (int q = 0; q < 4; ++q) {
    if (coeff[q] == 0) continue;
    const RingElem* src = x.p + static_cast<std::size_t>(q / 2) * h * x.ld + static_cast<std::size_t>(q % 2) * h;
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < h; ++j) {
        RingElem v = src[i * x.ld + j];
        if (coeff[q] < 0) v = -v;
        out[i * h + j] = first ? v : out[i * h + j] + v;
      }
    first = false;
  }
  if (first) std::fill(out, out + h * h, RingElem());
}

class Runner {
 public:
  explicit Runner(ExecTrace* trace) : trace_(trace) {}

  void run(const RecursionPlan& p, CView a, CView b, RingElem* c, std::size_t ldc) {
    const std::size_t s = p.size();
    if (p.is_leaf()) {
      leaf_multiply(p.variant(), s, a, b, c, ldc);
      if (trace_) {
        TraceEvent e;
    e.kind = TraceKind::LeafMul;
        e.level = static_cast<std::uint32_t>(path_.size());
        e.leaf_id = trace_->leaf_products.size();
        e.n_leaf = s;
        e.path = path_;
        trace_->events.push_back(std::move(e));
        trace_->leaf_products.push_back(static_cast<std::uint64_t>(s) * s * s);
      }
      return;
    }
    const FastScheme& sc = p.scheme();
    const std::size_t h = s / 2;
    const auto level = static_cast<std::uint32_t>(path_.size());
    Buf ea(h * h), eb(h * h);
    std::array<Buf, 7> m;
    for (int k = 0; k < 7; ++k) {
      encode(sc.encode_a[k], h, a, ea.data());
      record_encode(level, Factor::A, k);
      encode(sc.encode_b[k], h, b, eb.data());
      record_encode(level, Factor::B, k);
      m[k].resize(h * h);
      path_.push_back(static_cast<std::uint8_t>(k));
      run(p.child(k), {ea.data(), h}, {eb.data(), h}, m[k].data(), h);
      path_.pop_back();
    }
    for (int q = 0; q < 4; ++q) {
      RingElem* cq = c + static_cast<std::size_t>(q / 2) * h * ldc + static_cast<std::size_t>(q % 2) * h;
      for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < h; ++j) {
          RingElem acc;
          for (int k = 0; k < 7; ++k) {
            const std::int8_t d = sc.decode[q][k];
            if (d > 0)
              acc += m[k][i * h + j];
            else if (d < 0)
              acc -= m[k][i * h + j];
          }
          cq[i * ldc + j] = acc;
        }
      if (trace_) {
        TraceEvent e;
        e.kind = TraceKind::BlockDecode;
        e.level = level;
        e.index = static_cast<std::uint8_t>(q);
        trace_->events.push_back(std::move(e));
      }
    }
  }

 private:
  void record_encode(std::uint32_t level, Factor f, int k) {
    if (!trace_) return;
    TraceEvent e;
    e.kind = TraceKind::BlockEncode;
    e.level = level;
    e.factor = f;
    e.index = static_cast<std::uint8_t>(k);
    trace_->events.push_back(std::move(e));
  }

  ExecTrace* trace_;
  PlanPath path_;
};

void check_sizes(const RecursionPlan& plan, const Matrix& A, const Matrix& B) {
  if (A.n() != B.n()) throw std::invalid_argument("execute: A and B differ in size");
  if (A.n() != plan.size())
    throw std::invalid_argument("execute: matrix size " + std::to_string(A.n()) + " does not match plan size " +
                                std::to_string(plan.size()));
}

}  // namespace

std::uint64_t ExecTrace::total_products() const {
  return std::accumulate(leaf_products.begin(), leaf_products.end(), std::uint64_t{0});
}

ExecResult execute(const RecursionPlan& plan, const Matrix& A, const Matrix& B) {
  check_sizes(plan, A, B);
  ExecResult r{Matrix(A.n()), {}};
  Runner(&r.trace).run(plan, {A.data().data(), A.n()}, {B.data().data(), B.n()}, r.C.data().data(), A.n());
  return r;
}

Matrix multiply(const RecursionPlan& plan, const Matrix& A, const Matrix& B) {
  check_sizes(plan, A, B);
  Matrix C(A.n());
  Runner(nullptr).run(plan, {A.data().data(), A.n()}, {B.data().data(), B.n()}, C.data().data(), A.n());
  return C;
}

Matrix execute_standard_leaf(StandardVariant variant, const Matrix& A, const Matrix& B) {
  if (A.n() != B.n()) throw std::invalid_argument("execute_standard_leaf: dimension mismatch");
  Matrix C(A.n());
  if (A.n() == 0) return C;
  leaf_multiply(variant, A.n(), {A.data().data(), A.n()}, {B.data().data(), B.n()}, C.data().data(), A.n());
  return C;
}

}  // namespace hybridmm
