#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "hybridmm/cdag.hpp"
#include "hybridmm/report.hpp"

using namespace hybridmm;

namespace {

std::optional<std::string> slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Exits with kExitUsage on unreadable or malformed plan files.
RecursionPlan load_plan(const std::string& path) {
  const auto text = slurp(path);
  if (!text) {
    std::cerr << "cannot read plan file " << path << "\n";
    std::exit(kExitUsage);
  }
  try {
    return parse_plan(*text);
  } catch (const std::exception& e) {
    std::cerr << path << ": " << e.what() << "\n";
  }
  std::exit(kExitUsage);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybridmm: I/O lower bounds and schedules for hybrid fast/standard matrix multiplication"};
  app.require_subcommand(1);

  auto* verify = app.add_subcommand("verify", "run encoder and dominator checks");
  std::string scheme_file, json_file;
  VerifyOptions vopt;
  verify->add_option("--scheme", scheme_file, "scheme JSON replacing Strassen");
  verify->add_option("--max-vertices", vopt.max_vertices, "largest CDAG used for dominator checks (0 skips them)");
  verify->add_option("--seed", vopt.seed, "sampling seed");
  verify->add_option("--samples", vopt.samples, "random subsets per family");
  verify->add_option("--json", json_file, "write JSON detail to this file");

  auto* sweep = app.add_subcommand("sweep", "bounds and measured I/O over a grid, as CSV");
  std::string config_file, csv_file;
  sweep->add_option("--config", config_file, "key=value sweep description")->required();
  sweep->add_option("--out", csv_file, "CSV destination (default stdout)");

  auto* bounds = app.add_subcommand("bounds", "lower-bound report for one plan, as JSON");
  std::string plan_file;
  std::size_t n = 0;
  std::uint64_t M = 0, B = 1, P = 0, Bm = 0;
  std::string threshold = "2sqrtM";
  bounds->add_option("--plan", plan_file, "plan file")->required();
  bounds->add_option("--n", n, "problem size")->required();
  bounds->add_option("--M", M, "cache words")->required();
  bounds->add_option("--B", B, "words per block");
  bounds->add_option("--P", P, "processors (adds the parallel bound)");
  bounds->add_option("--Bm", Bm, "words per message (default B)");
  bounds->add_option("--threshold", threshold, "2sqrtM or 2M")->check(CLI::IsMember({"2sqrtM", "2M"}));

  auto* simulate = app.add_subcommand("simulate", "generate and simulate a schedule, as JSON");
  std::string dump_file;
  simulate->add_option("--plan", plan_file, "plan file")->required();
  simulate->add_option("--n", n, "problem size")->required();
  simulate->add_option("--M", M, "cache words")->required();
  simulate->add_option("--B", B, "words per block");
  simulate->add_option("--dump-schedule", dump_file, "write the move list to this file");

  auto* cdag = app.add_subcommand("cdag", "export the CDAG of a plan (size <= 16)");
  std::string cdag_out;
  cdag->add_option("--plan", plan_file, "plan file")->required();
  cdag->add_option("--out", cdag_out, "destination (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (*verify) {
    if (!scheme_file.empty()) {
      const auto text = slurp(scheme_file);
      if (!text) {
        std::cerr << "cannot read scheme file " << scheme_file << "\n";
        return kExitUsage;
      }
      try {
        vopt.scheme = scheme_from_json(*text);
      } catch (const std::exception& e) {
        std::cerr << scheme_file << ": " << e.what() << "\n";
        return kExitUsage;
      }
    }
    std::ofstream json;
    if (!json_file.empty()) {
      json.open(json_file);
      if (!json) {
        std::cerr << "cannot write " << json_file << "\n";
        return kExitUsage;
      }
    }
    return cmd_verify(vopt, std::cout, json_file.empty() ? nullptr : &json);
  }

  if (*sweep) {
    const auto text = slurp(config_file);
    if (!text) {
      std::cerr << "cannot read config " << config_file << "\n";
      return kExitUsage;
    }
    SweepConfig cfg;
    try {
      cfg = parse_sweep_config(*text);
    } catch (const ConfigError& e) {
      std::cerr << config_file << ": " << e.what() << "\n";
      return kExitUsage;
    }
    if (csv_file.empty()) return cmd_sweep(cfg, std::cout, std::cerr);
    std::ofstream out(csv_file);
    if (!out) {
      std::cerr << "cannot write " << csv_file << "\n";
      return kExitUsage;
    }
    return cmd_sweep(cfg, out, std::cerr);
  }

  if (*bounds) {
    BoundsRequest req{load_plan(plan_file), n, M, B, std::nullopt, std::nullopt,
                      threshold == "2M" ? MspThreshold::TwoM : MspThreshold::TwoSqrtM};
    if (P > 0) req.P = P;
    if (Bm > 0) req.Bm = Bm;
    return cmd_bounds(req, std::cout, std::cerr);
  }

  if (*simulate) {
    SimulateRequest req{load_plan(plan_file), n, M, B, std::nullopt};
    if (!dump_file.empty()) req.dump_path = dump_file;
    return cmd_simulate(req, std::cout, std::cerr);
  }

  if (*cdag) {
    const RecursionPlan plan = load_plan(plan_file);
    std::string text;
    try {
      text = export_cdag(build_cdag(plan));
    } catch (const std::exception& e) {
      std::cerr << "cdag: " << e.what() << "\n";
      return kExitUsage;
    }
    if (cdag_out.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(cdag_out);
      if (!out) {
        std::cerr << "cannot write " << cdag_out << "\n";
        return kExitUsage;
      }
      out << text;
    }
    return kExitOk;
  }
  return kExitUsage;
}
