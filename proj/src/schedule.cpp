#include "hybridmm/schedule.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace hybridmm {

namespace {

constexpr std::array<std::string_view, 6> kOpNames = {"mul", "add", "sub", "neg", "copy", "mac"};

Op parse_op(const std::string& s, std::size_t line) {
  for (std::size_t i = 0; i < kOpNames.size(); ++i)
    if (kOpNames[i] == s) return static_cast<Op>(i);
  throw std::invalid_argument("schedule line " + std::to_string(line) + ": unknown op '" + s + "'");
}

}  // namespace

std::string_view op_name(Op op) { return kOpNames[static_cast<std::size_t>(op)]; }

int op_arity(Op op) {
  switch (op) {
    case Op::Neg:
    case Op::Copy:
      return 1;
    case Op::Mac:
      return 3;
    default:
      return 2;
  }
}

void replay(const Schedule& s, MoveSink& sink) {
  sink.begin(s.layout);
  for (const auto& m : s.moves) sink.emit(m);
}

void write_move(std::ostream& os, const Move& m) {
  switch (m.kind) {
    case MoveKind::Read:
      os << "R " << m.addr << ' ' << m.count << '\n';
      break;
    case MoveKind::Write:
      os << "W " << m.addr << ' ' << m.count << '\n';
      break;
    case MoveKind::Evict:
      os << "E " << m.addr << '\n';
      break;
    case MoveKind::Compute:
      os << "C " << m.addr << ' ' << op_name(m.op);
      for (int i = 0; i < op_arity(m.op); ++i) os << ' ' << m.operands[static_cast<std::size_t>(i)];
      os << '\n';
      break;
  }
}

void DumpSink::begin(const MemoryLayout& layout) {
  os_ << "# n=" << layout.n << " words=" << layout.total_words << '\n';
}

void DumpSink::emit(const Move& m) { write_move(os_, m); }

void write_schedule(std::ostream& os, const Schedule& s) {
  DumpSink d(os);
  replay(s, d);
}

Schedule read_schedule(std::istream& is) {
  Schedule s;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    auto bad = [&] { return std::invalid_argument("schedule line " + std::to_string(lineno) + ": malformed"); };
    if (line[0] == '#') {
      std::string tok;
      ls >> tok;
      while (ls >> tok) {
        if (tok.rfind("n=", 0) == 0) s.layout.n = std::stoull(tok.substr(2));
        if (tok.rfind("words=", 0) == 0) s.layout.total_words = std::stoull(tok.substr(6));
      }
      continue;
    }
    char kind = 0;
    ls >> kind;
    Move m;
    switch (kind) {
      case 'R':
      case 'W':
        if (!(ls >> m.addr >> m.count)) throw bad();
        m.kind = kind == 'R' ? MoveKind::Read : MoveKind::Write;
        break;
      case 'E':
        if (!(ls >> m.addr)) throw bad();
        m.kind = MoveKind::Evict;
        break;
      case 'C': {
        std::string op;
        if (!(ls >> m.addr >> op)) throw bad();
        m.kind = MoveKind::Compute;
        m.op = parse_op(op, lineno);
        for (int i = 0; i < op_arity(m.op); ++i)
          if (!(ls >> m.operands[static_cast<std::size_t>(i)])) throw bad();
        break;
      }
      default:
        throw bad();
    }
    s.moves.push_back(m);
  }
  return s;
}

}  // namespace hybridmm
