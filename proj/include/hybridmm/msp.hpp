#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hybridmm/plan.hpp"

namespace hybridmm {

/// Size threshold a sub-problem must reach to be maximal. TwoSqrtM is the
/// default; TwoM reproduces the literal n_i >= 2M reading for sensitivity runs.
enum class MspThreshold : std::uint8_t { TwoSqrtM, TwoM };

struct MspDescriptor {
  int msp_type = 1;  // 1: standard leaf, 2: fast node with sub-threshold children
  std::size_t n_i = 0;
  PlanPath path;
};

/// True when s reaches the threshold for cache size M.
bool meets_msp_threshold(std::size_t s, std::uint64_t M, MspThreshold t = MspThreshold::TwoSqrtM);

/// Maximal Sub-Problems in depth-first order. Empty when plan.size() <= 2*sqrt(M).
std::vector<MspDescriptor> enumerate_msps(const RecursionPlan& plan, std::uint64_t M,
                                          MspThreshold t = MspThreshold::TwoSqrtM);

/// Sum of n_i^3 over Type 1 descriptors.
std::uint64_t t_total(const std::vector<MspDescriptor>& msps);

inline constexpr double kBoundConstant = 0.38988157484;

struct ParallelPart {
  std::uint64_t P = 1;
  std::uint64_t Bm = 1;
  double bound = 0;
};

struct BoundReport {
  std::size_t n = 0;         // requested size
  std::size_t n_eval = 0;    // size the bound was evaluated on
  bool padded = false;
  std::uint64_t M = 0;
  std::uint64_t B = 1;
  std::uint64_t nu1 = 0;
  std::uint64_t nu2 = 0;
  std::uint64_t t_total = 0;
  double c = kBoundConstant;
  double term_input = 0;  // 2n^2 / B
  double term_t = 0;      // c |T| / (sqrt(M) B)
  double term_nu2 = 0;    // nu2 M / B
  double sequential_bound = 0;
  std::optional<ParallelPart> parallel;
  std::optional<double> uniform_closed_form;
};

/// Sequential bound max{2n^2, c|T|/sqrt(M), nu2 M} / B for `plan`. n may be smaller than plan.size() only when plan.size()
/// is the next power of two above n (the padded problem).
BoundReport sequential_bound(const RecursionPlan& plan, std::size_t n, std::uint64_t M, std::uint64_t B,
                             MspThreshold t = MspThreshold::TwoSqrtM);

/// Parallel bound: max{c|T|/sqrt(M), nu2 M} / (P Bm).
double parallel_bound(const RecursionPlan& plan, std::size_t n, std::uint64_t M, std::uint64_t Bm,
                      std::uint64_t P, MspThreshold t = MspThreshold::TwoSqrtM);

/// (n / max{n0, 2 sqrt M})^{log2 7} (max{1, n0 / (2 sqrt M)})^3 M, the data term of the uniform closed form.
double uniform_inner_term(std::size_t n, std::size_t n0, std::uint64_t M);

/// Uniform closed form: max{2n^2, inner} / B.
double uniform_closed_form(std::size_t n, std::size_t n0, std::uint64_t M, std::uint64_t B);

/// Uniform parallel closed form: inner / (P Bm).
double uniform_parallel_closed_form(std::size_t n, std::size_t n0, std::uint64_t M, std::uint64_t Bm,
                                    std::uint64_t P);

std::string bound_report_to_json(const BoundReport& r);

}  // namespace hybridmm
