#include "hybridmm/report.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "hybridmm/cdag.hpp"
#include "hybridmm/dominator.hpp"
#include "hybridmm/lemmas.hpp"
#include "hybridmm/schedule_gen.hpp"
#include "hybridmm/simulator.hpp"
#include "json.hpp"

namespace hybridmm {

ConfigError::ConfigError(std::size_t line, const std::string& msg)
    : std::runtime_error(line == 0 ? "config: " + msg : "config line " + std::to_string(line) + ": " + msg),
      line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
std::vector<T> parse_list(std::string_view v, std::size_t line, std::string_view key) {
  std::vector<T> out;
  while (true) {
    const auto comma = v.find(',');
    const std::string_view item = trim(v.substr(0, comma));
    T x{};
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), x);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size())
      throw ConfigError(line, "bad integer '" + std::string(item) + "' for " + std::string(key));
    out.push_back(x);
    if (comma == std::string_view::npos) break;
    v = v.substr(comma + 1);
  }
  return out;
}

bool pow2(std::uint64_t x) { return x != 0 && (x & (x - 1)) == 0; }

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

}  // namespace

SweepConfig parse_sweep_config(std::string_view text) {
  SweepConfig cfg;
  std::map<std::string, std::size_t, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "expected key=value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view val = trim(line.substr(eq + 1));
    if (!seen.emplace(key, line_no).second) throw ConfigError(line_no, "duplicate key '" + key + "'");
    if (key == "n") {
      cfg.n = parse_list<std::size_t>(val, line_no, key);
      for (const auto x : cfg.n)
        if (!pow2(x)) throw ConfigError(line_no, "n=" + std::to_string(x) + " is not a power of two");
    } else if (key == "n0") {
      cfg.n0 = parse_list<std::size_t>(val, line_no, key);
      for (const auto x : cfg.n0)
        if (x == 0) throw ConfigError(line_no, "n0 must be positive");
    } else if (key == "M") {
      cfg.M = parse_list<std::uint64_t>(val, line_no, key);
    } else if (key == "B") {
      cfg.B = parse_list<std::uint64_t>(val, line_no, key);
      for (const auto x : cfg.B)
        if (x == 0) throw ConfigError(line_no, "B must be positive");
    } else if (key == "plan") {
      if (val == "uniform")
        cfg.source = PlanSource::Uniform;
      else if (val == "random")
        cfg.source = PlanSource::Random;
      else if (val == "file")
        cfg.source = PlanSource::File;
      else
        throw ConfigError(line_no, "plan must be uniform, random or file");
    } else if (key == "seed") {
      cfg.seed = parse_list<std::uint64_t>(val, line_no, key).at(0);
    } else if (key == "count") {
      cfg.count = parse_list<std::size_t>(val, line_no, key).at(0);
      if (cfg.count == 0) throw ConfigError(line_no, "count must be positive");
    } else if (key == "p_fast") {
      try {
        std::size_t used = 0;
        cfg.p_fast = std::stod(std::string(val), &used);
        if (used != val.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ConfigError(line_no, "bad number '" + std::string(val) + "' for p_fast");
      }
      if (!(cfg.p_fast >= 0.0 && cfg.p_fast <= 1.0)) throw ConfigError(line_no, "p_fast must lie in [0, 1]");
    } else if (key == "plan_file") {
      cfg.plan_file = std::string(val);
    } else if (key == "threshold") {
      if (val == "2sqrtM")
        cfg.threshold = MspThreshold::TwoSqrtM;
      else if (val == "2M")
        cfg.threshold = MspThreshold::TwoM;
      else
        throw ConfigError(line_no, "threshold must be 2sqrtM or 2M");
    } else if (key == "commands") {
      cfg.simulate = false;
      for (std::string_view rest = val; !rest.empty();) {
        const auto comma = rest.find(',');
        const std::string_view c = trim(rest.substr(0, comma));
        if (c == "simulate")
          cfg.simulate = true;
        else if (c != "bounds")
          throw ConfigError(line_no, "unknown command '" + std::string(c) + "'");
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      }
    } else {
      throw ConfigError(line_no, "unknown key '" + key + "'");
    }
  }
  auto line_of = [&](std::string_view k) {
    const auto it = seen.find(k);
    return it == seen.end() ? std::size_t{0} : it->second;
  };
  if (cfg.n.empty()) throw ConfigError(0, "missing key n");
  if (cfg.M.empty()) throw ConfigError(0, "missing key M");
  if (cfg.B.empty()) cfg.B = {1};
  if (cfg.source == PlanSource::Uniform && cfg.n0.empty()) throw ConfigError(0, "plan=uniform requires n0");
  if (cfg.source == PlanSource::File && cfg.plan_file.empty()) throw ConfigError(0, "plan=file requires plan_file");
  if (cfg.simulate)
    for (const auto m : cfg.M)
      if (m < 3) throw ConfigError(line_of("M"), "M=" + std::to_string(m) + " is below 3; simulation needs M >= 3");
  return cfg;
}

std::vector<SweepRow> run_sweep(const SweepConfig& cfg) {
  std::optional<RecursionPlan> file_plan;
  if (cfg.source == PlanSource::File) {
    std::ifstream in(cfg.plan_file);
    if (!in) throw std::runtime_error("cannot read plan file " + cfg.plan_file);
    std::stringstream ss;
    ss << in.rdbuf();
    file_plan = parse_plan(ss.str());
  }
  std::vector<SweepRow> rows;
  for (const std::size_t n : cfg.n) {
    std::vector<std::pair<std::string, RecursionPlan>> plans;
    std::vector<std::optional<std::size_t>> n0s;
    switch (cfg.source) {
      case PlanSource::Uniform:
        for (const std::size_t n0 : cfg.n0) {
          if (n0 > n) continue;
          plans.emplace_back("uniform(n0=" + std::to_string(n0) + ")", uniform_plan(n, n0));
          n0s.emplace_back(n0);
        }
        break;
      case PlanSource::Random:
        for (std::size_t r = 0; r < cfg.count; ++r) {
          const std::uint64_t seed = cfg.seed + r;
          plans.emplace_back("random(seed=" + std::to_string(seed) + ";p_fast=" + fmt(cfg.p_fast) + ")",
                             random_plan(n, cfg.p_fast, seed));
          n0s.emplace_back();
        }
        break;
      case PlanSource::File:
        if (file_plan->size() != n)
          throw std::runtime_error("plan file has size " + std::to_string(file_plan->size()) + ", sweep asks for n=" +
                                   std::to_string(n));
        plans.emplace_back("file(" + cfg.plan_file + ")", *file_plan);
        n0s.emplace_back();
        break;
    }
    for (std::size_t pi = 0; pi < plans.size(); ++pi)
      for (const std::uint64_t M : cfg.M)
        for (const std::uint64_t B : cfg.B) {
          SweepRow row;
          row.plan = plans[pi].first;
          row.n = n;
          row.M = M;
          row.B = B;
          row.bound = sequential_bound(plans[pi].second, n, M, B, cfg.threshold);
          if (n0s[pi]) row.bound.uniform_closed_form = uniform_closed_form(n, *n0s[pi], M, B);
          if (cfg.simulate) {
            PebbleMachine pm({M, B}, {false, false, true});
            gen_hybrid_schedule(plans[pi].second, {M, B}, pm);
            const IoStats st = pm.finish();
            row.io_total = st.io_total;
            row.reads = st.reads;
            row.writes = st.writes;
          }
          rows.push_back(std::move(row));
        }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << kSweepCsvHeader << "\n";
  for (const SweepRow& r : rows) {
    const BoundReport& b = r.bound;
    os << r.plan << ',' << r.n << ',' << r.M << ',' << r.B << ',' << b.nu1 << ',' << b.nu2 << ',' << b.t_total << ','
       << fmt(b.term_input) << ',' << fmt(b.term_t) << ',' << fmt(b.term_nu2) << ',' << fmt(b.sequential_bound) << ','
       << (b.uniform_closed_form ? fmt(*b.uniform_closed_form) : "") << ',';
    if (r.io_total)
      os << *r.io_total << ',' << *r.reads << ',' << *r.writes << ','
         << fmt(static_cast<double>(*r.io_total) / b.sequential_bound);
    else
      os << ",,,";
    os << "\n";
  }
  return os.str();
}

int cmd_sweep(const SweepConfig& cfg, std::ostream& out, std::ostream& err) {
  std::vector<SweepRow> rows;
  try {
    rows = run_sweep(cfg);
  } catch (const SimError& e) {
    err << "sweep: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "sweep: " << e.what() << "\n";
    return kExitUsage;
  }
  out << sweep_csv(rows);
  int code = kExitOk;
  for (const SweepRow& r : rows)
    if (r.io_total && static_cast<double>(*r.io_total) + 1e-9 < r.bound.sequential_bound) {
      err << "sweep: " << r.plan << " n=" << r.n << " M=" << r.M << " B=" << r.B << " measured " << *r.io_total
          << " below bound " << fmt(r.bound.sequential_bound) << "\n";
      code = kExitFailure;
    }
  return code;
}

namespace {

using ojson = nlohmann::ordered_json;

ojson encoder_json(const char* factor, const FastScheme::EncodeMatrix& e, std::ostream& out, bool& ok) {
  const EncoderGraph g = encoder_graph(e);
  const bool distinct = verify_encoder_distinct_neighborhoods(g);
  const ConnectivityReport conn = verify_encoder_connectivity(g);
  ojson failing = ojson::array();
  for (const SubsetCheck& c : conn.checks)
    if (!c.pass) failing.push_back({{"subset", c.subset}, {"matching", c.matching}, {"required", c.required}});
  out << "encoder " << factor << " distinct neighborhoods: " << (distinct ? "PASS" : "FAIL") << "\n";
  out << "encoder " << factor << " connectivity: " << (conn.pass ? "PASS" : "FAIL") << " (" << conn.checks.size()
      << " subsets)\n";
  for (const auto& f : failing)
    out << "  failing subset " << f["subset"] << ": matching " << f["matching"] << " < " << f["required"] << "\n";
  ok = ok && distinct && conn.pass;
  return {{"distinct", distinct}, {"connectivity", conn.pass}, {"subsets", conn.checks.size()}, {"failing", failing}};
}

}  // namespace

int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream* json) {
  const FastScheme& sc = opt.scheme ? *opt.scheme : FastScheme::strassen();
  bool ok = true;
  ojson detail;
  detail["scheme"] = sc.name;
  detail["encoder_a"] = encoder_json("A", sc.encode_a, out, ok);
  detail["encoder_b"] = encoder_json("B", sc.encode_b, out, ok);

  std::vector<RecursionPlan> plans;
  for (const std::size_t n : {2, 4, 8}) {
    for (std::size_t n0 = 1; n0 <= n; n0 *= 2) plans.push_back(uniform_plan(n, n0, sc));
    plans.push_back(uniform_plan(n, n, sc, StandardVariant::BlockRecursive));
  }
  ojson dom = ojson::array();
  std::size_t checked = 0, violations = 0, skipped = 0;
  {
    const Cdag base = build_cdag(uniform_plan(2, 1, sc));
    if (base.vertex_count() <= opt.max_vertices) {
      const std::size_t flow = min_dominator_size(base, base.global_outputs(), base.global_inputs());
      const std::size_t exh = exhaustive_min_dominator(base, base.global_outputs(), base.global_inputs());
      const bool agree = flow == exh && 2 * flow >= base.global_outputs().size();
      out << "dominator oracle (n=2 outputs): max-flow " << flow << ", exhaustive " << exh << ": "
          << (agree ? "PASS" : "FAIL") << "\n";
      detail["oracle"] = {{"max_flow", flow}, {"exhaustive", exh}, {"pass", agree}};
      ok = ok && agree;
    } else {
      out << "dominator oracle: SKIPPED\n";
      detail["oracle"] = "SKIPPED";
    }
  }
  for (const RecursionPlan& p : plans) {
    const Cdag g = build_cdag(p);
    for (const std::uint64_t M : {1, 4}) {
      if (g.vertex_count() > opt.max_vertices) {
        ++skipped;
        continue;
      }
      LemmaOptions lo;
      lo.seed = opt.seed;
      lo.samples = opt.samples;
      for (const LemmaReport& r : {verify_dominator_lemma_type2(g, M, lo), verify_dominator_lemma_type1_inputs(g, M, lo),
                                   verify_dominator_lemma_type1_products(g, M, lo)}) {
        checked += r.checked;
        violations += r.violations;
        ojson j = ojson::parse(lemma_report_to_json(r));
        j["plan"] = serialize_plan(p);
        j["M"] = M;
        dom.push_back(std::move(j));
        for (const DominatorSample& f : r.failures)
          out << "  " << r.lemma << " violation: " << serialize_plan(p) << " M=" << M << " " << f.detail << " |D|="
              << f.min_dominator << " < " << f.bound << "\n";
      }
    }
  }
  if (checked == 0 && skipped > 0) {
    out << "dominator lemmas: SKIPPED\n";
    detail["dominator"] = "SKIPPED";
  } else {
    out << "dominator lemmas: " << (violations == 0 ? "PASS" : "FAIL") << " (" << checked << " checks, " << violations
        << " violations, " << skipped << " skipped)\n";
    detail["dominator"] = dom;
  }
  ok = ok && violations == 0;
  detail["pass"] = ok;
  out << "verify: " << (ok ? "PASS" : "FAIL") << "\n";
  if (json) *json << detail.dump(2) << "\n";
  return ok ? kExitOk : kExitFailure;
}

int cmd_bounds(const BoundsRequest& req, std::ostream& out, std::ostream& err) {
  BoundReport r;
  try {
    r = sequential_bound(req.plan, req.n, req.M, req.B, req.threshold);
    if (req.P) {
      const std::uint64_t bm = req.Bm.value_or(req.B);
      r.parallel = ParallelPart{*req.P, bm, parallel_bound(req.plan, req.n, req.M, bm, *req.P, req.threshold)};
    }
  } catch (const std::exception& e) {
    err << "bounds: " << e.what() << "\n";
    return kExitUsage;
  }
  out << bound_report_to_json(r) << "\n";
  return kExitOk;
}

int cmd_simulate(const SimulateRequest& req, std::ostream& out, std::ostream& err) {
  if (req.n != req.plan.size()) {
    err << "simulate: plan has size " << req.plan.size() << ", --n is " << req.n << "\n";
    return kExitUsage;
  }
  if (req.M < 3 || req.B == 0) {
    err << "simulate: need M >= 3 and B >= 1\n";
    return kExitUsage;
  }
  PebbleMachine pm({req.M, req.B}, {false, true, true});
  IoStats st;
  try {
    if (req.dump_path) {
      std::ofstream f(*req.dump_path);
      if (!f) {
        err << "simulate: cannot write " << *req.dump_path << "\n";
        return kExitUsage;
      }
      DumpSink dump(f);
      TeeSink tee(pm, dump);
      gen_hybrid_schedule(req.plan, {req.M, req.B}, tee);
    } else {
      gen_hybrid_schedule(req.plan, {req.M, req.B}, pm);
    }
    st = pm.finish();
  } catch (const SimError& e) {
    err << "simulate: " << e.what() << "\n";
    return kExitFailure;
  }
  const BoundReport b = sequential_bound(req.plan, req.n, req.M, req.B);
  ojson j;
  j["plan"] = serialize_plan(req.plan);
  j["n"] = req.n;
  j["M"] = req.M;
  j["B"] = req.B;
  j["reads"] = st.reads;
  j["writes"] = st.writes;
  j["io_total"] = st.io_total;
  j["peak_cache"] = st.peak_cache;
  j["steps"] = pm.steps();
  j["parsimonious"] = pm.parsimony().ok;
  j["bound"] = b.sequential_bound;
  j["ratio"] = static_cast<double>(st.io_total) / b.sequential_bound;
  out << j.dump(2) << "\n";
  const bool ok = pm.parsimony().ok && static_cast<double>(st.io_total) + 1e-9 >= b.sequential_bound;
  return ok ? kExitOk : kExitFailure;
}

}  // namespace hybridmm
