#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hybridmm/msp.hpp"
#include "hybridmm/plan.hpp"
#include "hybridmm/scheme.hpp"

namespace hybridmm {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

enum class PlanSource : std::uint8_t { Uniform, Random, File };

/// Sweep description read from key=value lines; lists are comma separated.
///   n=16,32  n0=1,4  M=12,48  B=1,4
///   plan=uniform | random | file     seed=7  p_fast=0.5  count=3  plan_file=path
///   threshold=2sqrtM | 2M            commands=bounds,simulate
struct SweepConfig {
  std::vector<std::size_t> n, n0;
  std::vector<std::uint64_t> M, B;
  PlanSource source = PlanSource::Uniform;
  std::uint64_t seed = 1;
  double p_fast = 0.5;
  std::size_t count = 1;
  std::string plan_file;
  MspThreshold threshold = MspThreshold::TwoSqrtM;
  bool simulate = true;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, const std::string& msg);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Throws ConfigError; line 0 refers to the file as a whole.
SweepConfig parse_sweep_config(std::string_view text);

struct SweepRow {
  std::string plan;  // uniform(n0) | random(seed,p_fast) | file
  std::size_t n = 0;
  std::uint64_t M = 0, B = 0;
  BoundReport bound;
  std::optional<std::uint64_t> io_total, reads, writes;
};

/// Rows in config order: for each n, each plan, each M, each B.
std::vector<SweepRow> run_sweep(const SweepConfig& cfg);

inline constexpr std::string_view kSweepCsvHeader =
    "plan,n,M,B,nu1,nu2,t_total,term_input,term_t,term_nu2,bound,closed_form,io_total,reads,writes,ratio";

std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Writes the CSV to `out`; kExitFailure when a measured row falls below its bound.
int cmd_sweep(const SweepConfig& cfg, std::ostream& out, std::ostream& err);

struct VerifyOptions {
  std::optional<FastScheme> scheme;  // default: Strassen
  std::size_t max_vertices = 5000;   // CDAGs above this size skip dominator checks; 0 skips all
  std::uint64_t seed = 1;
  std::size_t samples = 200;
};

/// Encoder and dominator suites; summary on `out`, JSON detail on `json`.
int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream* json);

struct BoundsRequest {
  RecursionPlan plan;
  std::size_t n = 0;
  std::uint64_t M = 0, B = 1;
  std::optional<std::uint64_t> P, Bm;
  MspThreshold threshold = MspThreshold::TwoSqrtM;
};

int cmd_bounds(const BoundsRequest& req, std::ostream& out, std::ostream& err);

struct SimulateRequest {
  RecursionPlan plan;
  std::size_t n = 0;
  std::uint64_t M = 0, B = 1;
  std::optional<std::string> dump_path;
};

int cmd_simulate(const SimulateRequest& req, std::ostream& out, std::ostream& err);

}  // namespace hybridmm
