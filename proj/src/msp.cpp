#include "hybridmm/msp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hybridmm/matrix.hpp"
#include "json.hpp"

namespace hybridmm {

namespace {

void collect(const RecursionPlan& p, std::uint64_t M, MspThreshold t, PlanPath& path,
             std::vector<MspDescriptor>& out) {
  if (!meets_msp_threshold(p.size(), M, t)) return;
  if (p.is_leaf()) {
    out.push_back({1, p.size(), path});
    return;
  }
  if (!meets_msp_threshold(p.size() / 2, M, t)) {
    out.push_back({2, p.size(), path});
    return;
  }
  for (int k = 0; k < 7; ++k) {
    path.push_back(static_cast<std::uint8_t>(k));
    collect(p.child(k), M, t, path, out);
    path.pop_back();
  }
}

// r^{log2 7}, exact when r is a power of two >= 1.
double pow_log2_7(double r) {
  int e = 0;
  const double m = std::frexp(r, &e);
  if (m == 0.5 && e >= 1) {
    double v = 1;
    for (int i = 1; i < e; ++i) v *= 7;
    return v;
  }
  return std::pow(r, std::log2(7.0));
}

}  // namespace

bool meets_msp_threshold(std::size_t s, std::uint64_t M, MspThreshold t) {
  const auto s64 = static_cast<std::uint64_t>(s);
  if (t == MspThreshold::TwoM) return s64 >= 2 * M;
  return s64 * s64 >= 4 * M;
}

std::vector<MspDescriptor> enumerate_msps(const RecursionPlan& plan, std::uint64_t M, MspThreshold t) {
  std::vector<MspDescriptor> out;
  const auto n = static_cast<std::uint64_t>(plan.size());
  if (n * n <= 4 * M) return out;
  PlanPath path;
  collect(plan, M, t, path, out);
  return out;
}

std::uint64_t t_total(const std::vector<MspDescriptor>& msps) {
  std::uint64_t sum = 0;
  for (const auto& d : msps)
    if (d.msp_type == 1) sum += static_cast<std::uint64_t>(d.n_i) * d.n_i * d.n_i;
  return sum;
}

BoundReport sequential_bound(const RecursionPlan& plan, std::size_t n, std::uint64_t M, std::uint64_t B,
                             MspThreshold t) {
  if (M < 1 || B < 1) throw std::invalid_argument("sequential_bound: M and B must be >= 1");
  if (n == 0 || next_pow2(n) != plan.size())
    throw std::invalid_argument("sequential_bound: plan size " + std::to_string(plan.size()) +
                                " does not match n = " + std::to_string(n));
  BoundReport r;
  r.n = n;
  r.n_eval = plan.size();
  r.padded = r.n_eval != n;
  r.M = M;
  r.B = B;
  const auto msps = enumerate_msps(plan, M, t);
  for (const auto& d : msps) (d.msp_type == 1 ? r.nu1 : r.nu2) += 1;
  r.t_total = t_total(msps);
  const double ne = static_cast<double>(r.n_eval);
  const double b = static_cast<double>(B);
  r.term_input = 2 * ne * ne / b;
  r.term_t = r.c * static_cast<double>(r.t_total) / std::sqrt(static_cast<double>(M)) / b;
  r.term_nu2 = static_cast<double>(r.nu2) * static_cast<double>(M) / b;
  r.sequential_bound = std::max({r.term_input, r.term_t, r.term_nu2});
  return r;
}

double parallel_bound(const RecursionPlan& plan, std::size_t n, std::uint64_t M, std::uint64_t Bm,
                      std::uint64_t P, MspThreshold t) {
  if (P < 1 || Bm < 1) throw std::invalid_argument("parallel_bound: P and Bm must be >= 1");
  const BoundReport r = sequential_bound(plan, n, M, 1, t);
  return std::max(r.term_t, r.term_nu2) / static_cast<double>(P * Bm);
}

double uniform_inner_term(std::size_t n, std::size_t n0, std::uint64_t M) {
  if (!is_pow2(n) || !is_pow2(n0)) throw std::invalid_argument("uniform_inner_term: n, n0 must be powers of two");
  if (M < 1) throw std::invalid_argument("uniform_inner_term: M must be >= 1");
  const double two_sqrt_m = std::sqrt(4.0 * static_cast<double>(M));
  const double dn = static_cast<double>(n);
  const double dn0 = static_cast<double>(n0);
  const double ratio = dn / std::max(dn0, two_sqrt_m);
  const double scale = std::max(1.0, dn0 / two_sqrt_m);
  return pow_log2_7(ratio) * scale * scale * scale * static_cast<double>(M);
}

double uniform_closed_form(std::size_t n, std::size_t n0, std::uint64_t M, std::uint64_t B) {
  if (B < 1) throw std::invalid_argument("uniform_closed_form: B must be >= 1");
  const double dn = static_cast<double>(n);
  return std::max(2 * dn * dn, uniform_inner_term(n, n0, M)) / static_cast<double>(B);
}

double uniform_parallel_closed_form(std::size_t n, std::size_t n0, std::uint64_t M, std::uint64_t Bm,
                                    std::uint64_t P) {
  if (P < 1 || Bm < 1) throw std::invalid_argument("uniform_parallel_closed_form: P and Bm must be >= 1");
  return uniform_inner_term(n, n0, M) / static_cast<double>(P * Bm);
}

std::string bound_report_to_json(const BoundReport& r) {
  nlohmann::ordered_json j;
  j["n"] = r.n;
  j["n_evaluated"] = r.n_eval;
  j["padded"] = r.padded;
  j["M"] = r.M;
  j["B"] = r.B;
  j["nu1"] = r.nu1;
  j["nu2"] = r.nu2;
  j["t_total"] = r.t_total;
  j["c"] = r.c;
  j["term_input"] = r.term_input;
  j["term_t"] = r.term_t;
  j["term_nu2"] = r.term_nu2;
  j["sequential_bound"] = r.sequential_bound;
  if (r.parallel) {
    j["parallel"] = {{"P", r.parallel->P}, {"Bm", r.parallel->Bm}, {"bound", r.parallel->bound}};
  }
  if (r.uniform_closed_form) j["uniform_closed_form"] = *r.uniform_closed_form;
  return j.dump(2);
}

}  // namespace hybridmm
