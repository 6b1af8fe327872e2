#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace hybridmm {

enum class MoveKind : std::uint8_t { Read, Write, Compute, Evict };

/// Mac computes out = s0 + s1 * s2.
enum class Op : std::uint8_t { Mul, Add, Sub, Neg, Copy, Mac };

std::string_view op_name(Op op);
int op_arity(Op op);

/// One pebble-game move. Cache slots are named by the slow-memory address
/// whose value they hold, so READ(a, k) fills slots a..a+k-1 and WRITE(a, k)
/// stores them back.
struct Move {
  MoveKind kind = MoveKind::Evict;
  Op op = Op::Copy;
  std::uint32_t count = 0;  // READ / WRITE
  std::uint64_t addr = 0;   // READ / WRITE start, COMPUTE output slot, EVICT slot
  std::array<std::uint64_t, 3> operands{};

  static Move read(std::uint64_t a, std::uint32_t k) { return {MoveKind::Read, Op::Copy, k, a, {}}; }
  static Move write(std::uint64_t a, std::uint32_t k) { return {MoveKind::Write, Op::Copy, k, a, {}}; }
  static Move evict(std::uint64_t slot) { return {MoveKind::Evict, Op::Copy, 0, slot, {}}; }
  static Move compute(std::uint64_t out, Op op, std::uint64_t s0, std::uint64_t s1 = 0, std::uint64_t s2 = 0) {
    return {MoveKind::Compute, op, 0, out, {s0, s1, s2}};
  }
};

/// Slow-memory layout: A at 0, B at n^2, C at 2n^2 (all row-major), then
/// temporaries up to total_words.
struct MemoryLayout {
  std::size_t n = 0;
  std::uint64_t total_words = 0;

  std::uint64_t a_base() const { return 0; }
  std::uint64_t b_base() const { return n * n; }
  std::uint64_t c_base() const { return 2 * n * n; }
  std::uint64_t temp_base() const { return 3 * n * n; }
  bool is_input(std::uint64_t addr) const { return addr < 2 * n * n; }
  bool is_output(std::uint64_t addr) const { return addr >= 2 * n * n && addr < 3 * n * n; }

  static MemoryLayout for_product(std::size_t n, std::uint64_t temp_words = 0) {
    return {n, 3 * static_cast<std::uint64_t>(n) * n + temp_words};
  }
};

struct MachineConfig {
  std::uint64_t M = 3;  // cache words
  std::uint64_t B = 1;  // words per I/O operation
};

struct IoStats {
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t io_total = 0;
  std::uint64_t peak_cache = 0;
  std::uint64_t computes = 0;
};

/// Receives a schedule move by move, so generators can feed a simulator
/// without materializing the whole sequence.
class MoveSink {
 public:
  virtual ~MoveSink() = default;
  virtual void begin(const MemoryLayout& layout) = 0;
  virtual void emit(const Move& m) = 0;
};

struct Schedule : MoveSink {
  MemoryLayout layout;
  std::vector<Move> moves;

  void begin(const MemoryLayout& l) override {
    layout = l;
    moves.clear();
  }
  void emit(const Move& m) override { moves.push_back(m); }
};

/// Replays a stored schedule into another sink.
void replay(const Schedule& s, MoveSink& sink);

/// Line-oriented dump: "R addr k", "W addr k", "C slot op s1 [s2 [s3]]", "E slot",
/// preceded by "# n=<n> words=<total>" header lines.
void write_move(std::ostream& os, const Move& m);
void write_schedule(std::ostream& os, const Schedule& s);
Schedule read_schedule(std::istream& is);

/// Streams moves to a text dump as they are emitted.
class DumpSink : public MoveSink {
 public:
  explicit DumpSink(std::ostream& os) : os_(os) {}
  void begin(const MemoryLayout& layout) override;
  void emit(const Move& m) override;

 private:
  std::ostream& os_;
};

/// Forwards every move to two sinks.
class TeeSink : public MoveSink {
 public:
  TeeSink(MoveSink& a, MoveSink& b) : a_(a), b_(b) {}
  void begin(const MemoryLayout& layout) override {
    a_.begin(layout);
    b_.begin(layout);
  }
  void emit(const Move& m) override {
    a_.emit(m);
    b_.emit(m);
  }

 private:
  MoveSink& a_;
  MoveSink& b_;
};

}  // namespace hybridmm
