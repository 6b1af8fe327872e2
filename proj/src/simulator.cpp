#include "hybridmm/simulator.hpp"

#include <algorithm>
#include <limits>

namespace hybridmm {

std::string_view sim_error_name(SimErrorCode c) {
  switch (c) {
    case SimErrorCode::IllegalOperand:
      return "ILLEGAL_OPERAND";
    case SimErrorCode::CacheOverflow:
      return "CACHE_OVERFLOW";
    case SimErrorCode::BadBlock:
      return "BAD_BLOCK";
    case SimErrorCode::NotResident:
      return "NOT_RESIDENT";
    case SimErrorCode::UndefinedRead:
      return "UNDEFINED_READ";
    case SimErrorCode::BadAddress:
      return "BAD_ADDRESS";
    case SimErrorCode::IncompleteOutput:
      return "INCOMPLETE_OUTPUT";
  }
  return "UNKNOWN";
}

SimError::SimError(SimErrorCode code, std::size_t step, const std::string& detail)
    : std::runtime_error(std::string(sim_error_name(code)) + " at step " + std::to_string(step) + ": " + detail),
      code_(code),
      step_(step) {}

PebbleMachine::PebbleMachine(MachineConfig cfg, MachineOptions opt) : cfg_(cfg), opt_(opt) {}

void PebbleMachine::set_inputs(const Matrix& A, const Matrix& B) {
  in_a_ = &A;
  in_b_ = &B;
  opt_.track_values = true;
}

void PebbleMachine::begin(const MemoryLayout& layout) {
  layout_ = layout;
  const std::size_t w = layout.total_words;
  stats_ = {};
  step_ = 0;
  occupancy_ = 0;
  finished_ = false;
  parsimony_ = {};
  resident_.assign(w, 0);
  defined_.assign(w, 0);
  written_.assign(w, 0);
  std::fill(defined_.begin(), defined_.begin() + static_cast<std::ptrdiff_t>(std::min<std::uint64_t>(w, 2 * layout.n * layout.n)), 1);
  if (opt_.track_values) {
    cache_val_.assign(w, RingElem());
    slow_val_.assign(w, RingElem());
    if (in_a_ && in_b_) {
      if (in_a_->n() != layout.n || in_b_->n() != layout.n)
        throw std::invalid_argument("PebbleMachine: input matrices do not match the layout");
      std::copy(in_a_->data().begin(), in_a_->data().end(), slow_val_.begin() + static_cast<std::ptrdiff_t>(layout.a_base()));
      std::copy(in_b_->data().begin(), in_b_->data().end(), slow_val_.begin() + static_cast<std::ptrdiff_t>(layout.b_base()));
    }
  }
  if (opt_.check_parsimony) {
    cache_ver_.assign(w, Version{});
    slow_ver_.assign(w, Version{});
    read_unused_.assign(w, 0);
  }
}

void PebbleMachine::fail(SimErrorCode c, const std::string& detail) const { throw SimError(c, step_, detail); }

void PebbleMachine::check_range(std::uint64_t addr, std::uint64_t k) const {
  if (addr >= layout_.total_words || k > layout_.total_words - addr)
    fail(SimErrorCode::BadAddress, "address " + std::to_string(addr) + "+" + std::to_string(k) + " outside " +
                                       std::to_string(layout_.total_words) + " words");
}

void PebbleMachine::occupy(std::uint64_t addr) {
  if (occupancy_ + 1 > cfg_.M)
    fail(SimErrorCode::CacheOverflow, "loading slot " + std::to_string(addr) + " exceeds M=" + std::to_string(cfg_.M));
  resident_[addr] = 1;
  ++occupancy_;
  stats_.peak_cache = std::max(stats_.peak_cache, occupancy_);
}

void PebbleMachine::violation(std::size_t step, std::string reason) {
  parsimony_.ok = false;
  parsimony_.violations.push_back({step, std::move(reason)});
}

void PebbleMachine::use_operand(std::uint64_t a) {
  read_unused_[a] = 0;
  Version& v = cache_ver_[a];
  v.used = true;
  if (slow_ver_[a].id == v.id) slow_ver_[a].used = true;
}

void PebbleMachine::drop_cache_version(std::uint64_t a, const char* how) {
  const Version& v = cache_ver_[a];
  if (v.id != 0 && v.id != slow_ver_[a].id && !v.used)
    violation(v.step, "value computed into slot " + std::to_string(a) + " " + how + " without use");
  cache_ver_[a] = Version{};
}

void PebbleMachine::emit(const Move& m) {
  if (finished_) throw std::logic_error("PebbleMachine: emit after finish");
  const bool pars = opt_.check_parsimony;
  switch (m.kind) {
    case MoveKind::Read: {
      if (m.count == 0 || m.count > cfg_.B)
        fail(SimErrorCode::BadBlock, "read of " + std::to_string(m.count) + " words with B=" + std::to_string(cfg_.B));
      check_range(m.addr, m.count);
      for (std::uint64_t a = m.addr; a < m.addr + m.count; ++a) {
        if (!defined_[a]) fail(SimErrorCode::UndefinedRead, "slow word " + std::to_string(a) + " holds no value");
        if (resident_[a]) {
          if (pars) {
            if (read_unused_[a]) violation(step_, "slot " + std::to_string(a) + " re-read before use");
            drop_cache_version(a, "replaced by a read");
          }
        } else {
          occupy(a);
        }
        if (opt_.track_values) cache_val_[a] = slow_val_[a];
        if (pars) {
          cache_ver_[a] = slow_ver_[a];
          read_unused_[a] = 1;
        }
      }
      ++stats_.reads;
      break;
    }
    case MoveKind::Write: {
      if (m.count == 0 || m.count > cfg_.B)
        fail(SimErrorCode::BadBlock, "write of " + std::to_string(m.count) + " words with B=" + std::to_string(cfg_.B));
      check_range(m.addr, m.count);
      for (std::uint64_t a = m.addr; a < m.addr + m.count; ++a)
        if (!resident_[a]) fail(SimErrorCode::NotResident, "write of uncached slot " + std::to_string(a));
      for (std::uint64_t a = m.addr; a < m.addr + m.count; ++a) {
        if (pars) {
          if (read_unused_[a]) {
            violation(step_, "slot " + std::to_string(a) + " written back before use");
            read_unused_[a] = 0;
          }
          const Version& old = slow_ver_[a];
          if (old.id != 0 && old.id != cache_ver_[a].id && !old.used)
            violation(old.step, "value stored at " + std::to_string(a) + " overwritten without use");
          slow_ver_[a] = cache_ver_[a];
        }
        if (opt_.track_values) slow_val_[a] = cache_val_[a];
        defined_[a] = 1;
        written_[a] = 1;
      }
      ++stats_.writes;
      break;
    }
    case MoveKind::Compute: {
      check_range(m.addr, 1);
      const int arity = op_arity(m.op);
      for (int i = 0; i < arity; ++i) {
        const std::uint64_t s = m.operands[static_cast<std::size_t>(i)];
        check_range(s, 1);
        if (!resident_[s]) fail(SimErrorCode::IllegalOperand, "operand slot " + std::to_string(s) + " not cached");
      }
      if (opt_.track_values) {
        const auto& o = m.operands;
        RingElem v;
        switch (m.op) {
          case Op::Mul: v = cache_val_[o[0]] * cache_val_[o[1]]; break;
          case Op::Add: v = cache_val_[o[0]] + cache_val_[o[1]]; break;
          case Op::Sub: v = cache_val_[o[0]] - cache_val_[o[1]]; break;
          case Op::Neg: v = -cache_val_[o[0]]; break;
          case Op::Copy: v = cache_val_[o[0]]; break;
          case Op::Mac: v = cache_val_[o[0]] + cache_val_[o[1]] * cache_val_[o[2]]; break;
        }
        cache_val_[m.addr] = v;
      }
      if (pars) {
        for (int i = 0; i < arity; ++i) use_operand(m.operands[static_cast<std::size_t>(i)]);
        if (resident_[m.addr]) {
          if (read_unused_[m.addr]) {
            violation(step_, "slot " + std::to_string(m.addr) + " overwritten before use");
            read_unused_[m.addr] = 0;
          }
          drop_cache_version(m.addr, "overwritten");
        }
      }
      if (!resident_[m.addr]) occupy(m.addr);
      if (pars) cache_ver_[m.addr] = Version{next_version_++, step_, false};
      ++stats_.computes;
      break;
    }
    case MoveKind::Evict: {
      check_range(m.addr, 1);
      if (!resident_[m.addr]) fail(SimErrorCode::NotResident, "evict of uncached slot " + std::to_string(m.addr));
      if (pars) {
        if (read_unused_[m.addr]) {
          violation(step_, "slot " + std::to_string(m.addr) + " evicted before use");
          read_unused_[m.addr] = 0;
        }
        drop_cache_version(m.addr, "evicted");
      }
      resident_[m.addr] = 0;
      --occupancy_;
      break;
    }
  }
  ++step_;
}

IoStats PebbleMachine::finish() {
  if (!finished_) {
    finished_ = true;
    if (opt_.require_outputs) {
      for (std::uint64_t a = layout_.c_base(); a < layout_.temp_base() && a < layout_.total_words; ++a)
        if (!written_[a])
          throw SimError(SimErrorCode::IncompleteOutput, step_, "output word " + std::to_string(a) + " never written");
    }
    if (opt_.check_parsimony) {
      for (std::uint64_t a = 0; a < layout_.total_words; ++a) {
        if (resident_[a]) {
          if (read_unused_[a]) violation(step_, "slot " + std::to_string(a) + " read but never used");
          drop_cache_version(a, "left in cache");
        }
        const Version& v = slow_ver_[a];
        if (v.id != 0 && !v.used && !layout_.is_output(a))
          violation(v.step, "value stored at " + std::to_string(a) + " never used");
      }
      std::stable_sort(parsimony_.violations.begin(), parsimony_.violations.end(),
                       [](const auto& x, const auto& y) { return x.step < y.step; });
    }
    stats_.io_total = stats_.reads + stats_.writes;
  }
  return stats_;
}

Matrix PebbleMachine::output() const {
  if (!opt_.track_values) throw std::logic_error("PebbleMachine::output requires value tracking");
  Matrix C(layout_.n);
  std::copy(slow_val_.begin() + static_cast<std::ptrdiff_t>(layout_.c_base()),
            slow_val_.begin() + static_cast<std::ptrdiff_t>(layout_.temp_base()), C.data().begin());
  return C;
}

IoStats simulate(const Schedule& s, MachineConfig cfg) {
  PebbleMachine pm(cfg);
  replay(s, pm);
  return pm.finish();
}

Matrix simulate_values(const Schedule& s, MachineConfig cfg, const Matrix& A, const Matrix& B) {
  PebbleMachine pm(cfg);
  pm.set_inputs(A, B);
  replay(s, pm);
  pm.finish();
  return pm.output();
}

ParsimonyReport check_parsimonious(const Schedule& s) {
  MachineConfig unbounded{std::numeric_limits<std::uint64_t>::max(), std::numeric_limits<std::uint32_t>::max()};
  PebbleMachine pm(unbounded, {false, true, false});
  replay(s, pm);
  pm.finish();
  return pm.parsimony();
}

}  // namespace hybridmm
