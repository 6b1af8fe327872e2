#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hybridmm/matrix.hpp"
#include "hybridmm/schedule.hpp"

namespace hybridmm {

enum class SimErrorCode : std::uint8_t {
  IllegalOperand,    // COMPUTE operand not in cache
  CacheOverflow,     // occupancy would exceed M
  BadBlock,          // READ/WRITE of 0 or more than B words
  NotResident,       // WRITE or EVICT of a slot that is not cached
  UndefinedRead,     // READ of a word never written and not an input
  BadAddress,        // address outside the layout
  IncompleteOutput,  // schedule ended with an output word never written
};

std::string_view sim_error_name(SimErrorCode c);

class SimError : public std::runtime_error {
 public:
  SimError(SimErrorCode code, std::size_t step, const std::string& detail);
  SimErrorCode code() const { return code_; }
  std::size_t step() const { return step_; }

 private:
  SimErrorCode code_;
  std::size_t step_;
};

struct ParsimonyViolation {
  std::size_t step = 0;
  std::string reason;
};

struct ParsimonyReport {
  bool ok = true;
  std::vector<ParsimonyViolation> violations;
};

struct MachineOptions {
  bool track_values = false;
  bool check_parsimony = false;
  bool require_outputs = true;
};

/// Executes moves against a cache of M words and a slow memory laid out per
/// MemoryLayout, throwing SimError on the first illegal move.
class PebbleMachine : public MoveSink {
 public:
  explicit PebbleMachine(MachineConfig cfg, MachineOptions opt = {});

  /// Initial contents of A and B for value tracking; call before begin().
  void set_inputs(const Matrix& A, const Matrix& B);

  void begin(const MemoryLayout& layout) override;
  void emit(const Move& m) override;

  /// Ends the schedule: checks outputs and closes parsimony bookkeeping.
  IoStats finish();

  const IoStats& stats() const { return stats_; }
  const ParsimonyReport& parsimony() const { return parsimony_; }
  std::size_t steps() const { return step_; }

  /// Slow-memory contents of C (value tracking only).
  Matrix output() const;

 private:
  struct Version {
    std::uint64_t id = 0;  // 0: original input or never defined
    std::uint64_t step = 0;
    bool used = false;
  };

  [[noreturn]] void fail(SimErrorCode c, const std::string& detail) const;
  void check_range(std::uint64_t addr, std::uint64_t k) const;
  void occupy(std::uint64_t addr);
  void use_operand(std::uint64_t addr);
  void drop_cache_version(std::uint64_t addr, const char* how);
  void violation(std::size_t step, std::string reason);

  MachineConfig cfg_;
  MachineOptions opt_;
  MemoryLayout layout_;
  IoStats stats_;
  std::size_t step_ = 0;
  std::uint64_t occupancy_ = 0;
  std::uint64_t next_version_ = 1;
  bool finished_ = false;

  std::vector<std::uint8_t> resident_;
  std::vector<std::uint8_t> defined_;
  std::vector<std::uint8_t> written_;

  std::vector<RingElem> cache_val_, slow_val_;
  const Matrix* in_a_ = nullptr;
  const Matrix* in_b_ = nullptr;

  std::vector<Version> cache_ver_, slow_ver_;
  std::vector<std::uint8_t> read_unused_;
  ParsimonyReport parsimony_;
};

/// Runs a complete schedule; throws SimError if it is illegal for cfg.
IoStats simulate(const Schedule& s, MachineConfig cfg);

/// Replays the schedule on concrete values and returns the C it leaves in slow memory.
Matrix simulate_values(const Schedule& s, MachineConfig cfg, const Matrix& A, const Matrix& B);

/// Every computed non-output value is used and every value read into cache is
/// used before it is evicted, written back, or the schedule ends.
ParsimonyReport check_parsimonious(const Schedule& s);

}  // namespace hybridmm
