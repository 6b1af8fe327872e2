#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "hybridmm/report.hpp"

using namespace hybridmm;
using nlohmann::json;

namespace {

std::size_t config_error_line(const std::string& text) {
  try {
    parse_sweep_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("config parsing") {
    const SweepConfig c = parse_sweep_config("# grid\nn=8,16\nn0=1,4\nM=12\nB=1,4\nthreshold=2M\ncommands=bounds\n");
    CHECK(c.n == std::vector<std::size_t>{8, 16});
    CHECK(c.n0 == std::vector<std::size_t>{1, 4});
    CHECK(c.B == std::vector<std::uint64_t>{1, 4});
    CHECK(c.threshold == MspThreshold::TwoM);
    CHECK_FALSE(c.simulate);
    const SweepConfig r = parse_sweep_config("n=8\nM=12\nplan=random\nseed=5\ncount=2\np_fast=0.25\n");
    CHECK(r.source == PlanSource::Random);
    CHECK(r.count == 2);
    CHECK(r.p_fast == doctest::Approx(0.25));
  }

  TEST_CASE("config errors carry line numbers") {
    CHECK(config_error_line("n=8\nM=12\nbogus=1\n") == 3);
    CHECK(config_error_line("n=8\nn=16\nM=12\n") == 2);
    CHECK(config_error_line("n=12\nM=12\n") == 1);
    CHECK(config_error_line("n=8\nM=abc\n") == 2);
    CHECK(config_error_line("n=8\nn0=1\nM=2\n") == 3);
    CHECK(config_error_line("n=8\nM=12\nthreshold=3M\n") == 3);
    CHECK(config_error_line("n=8\nM 12\n") == 2);
    try {
      parse_sweep_config("n=8\nM=12\nbogus=1\n");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }

  TEST_CASE("sweep rows and csv") {
    const SweepConfig c = parse_sweep_config("n=4,8\nn0=1,4\nM=4,12\nB=1,4\n");
    const auto rows = run_sweep(c);
    CHECK(rows.size() == 2 * 2 * 2 * 2);
    CHECK(rows.front().plan == "uniform(n0=1)");
    const std::string csv = sweep_csv(rows);
    CHECK(csv.substr(0, csv.find('\n')) == kSweepCsvHeader);
    for (const auto& r : rows) {
      REQUIRE(r.io_total.has_value());
      CHECK(static_cast<double>(*r.io_total) >= r.bound.sequential_bound);
      CHECK(*r.io_total == *r.reads + *r.writes);
    }
    CHECK(sweep_csv(run_sweep(c)) == csv);
  }

  TEST_CASE("hand-computed bound") {
    // n = 2 sqrt(M) has no MSPs; the input term 2 * 16 is the bound.
    auto rows = run_sweep(parse_sweep_config("n=4\nn0=1\nM=4\nB=1\ncommands=bounds\n"));
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].bound.nu1 + rows[0].bound.nu2 == 0);
    CHECK(rows[0].bound.sequential_bound == doctest::Approx(32.0));
    CHECK_FALSE(rows[0].io_total.has_value());
    // n = 8, M = 4: the seven size-4 children are Type 2; max{128, 0, 7 * 4} = 128.
    rows = run_sweep(parse_sweep_config("n=8\nn0=1\nM=4\nB=2\ncommands=bounds\n"));
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].bound.nu2 == 7);
    CHECK(rows[0].bound.term_nu2 == doctest::Approx(14.0));
    CHECK(rows[0].bound.sequential_bound == doctest::Approx(64.0));
  }

  TEST_CASE("blocking reduces measured traffic") {
    const auto rows = run_sweep(parse_sweep_config("n=16\nn0=4\nM=48\nB=1,4\n"));
    REQUIRE(rows.size() == 2);
    const double ratio = static_cast<double>(*rows[0].io_total) / static_cast<double>(*rows[1].io_total);
    CHECK(ratio > 1.0);
    CHECK(ratio <= 4.0);
  }

  TEST_CASE("cmd_sweep exit codes") {
    std::ostringstream out, err;
    CHECK(cmd_sweep(parse_sweep_config("n=8\nn0=2\nM=12\n"), out, err) == kExitOk);
    CHECK(out.str().rfind(std::string(kSweepCsvHeader), 0) == 0);
  }

  TEST_CASE("bounds json") {
    std::ostringstream out, err;
    REQUIRE(cmd_bounds({uniform_plan(16, 8), 16, 4, 1, 4, std::nullopt, MspThreshold::TwoSqrtM}, out, err) == kExitOk);
    const json j = json::parse(out.str());
    CHECK(j["nu1"] == 7);
    CHECK(j["t_total"] == 7 * 512);
    CHECK(j.contains("parallel"));
    CHECK(j["parallel"]["P"] == 4);

    std::ostringstream out2;
    REQUIRE(cmd_bounds({uniform_plan(16, 16), 16, 4, 1, std::nullopt, std::nullopt, MspThreshold::TwoSqrtM}, out2,
                       err) == kExitOk);
    const json s = json::parse(out2.str());
    CHECK(s["nu1"] == 1);
    CHECK(s["t_total"] == 4096);
    CHECK_FALSE(s.contains("parallel"));
  }

  TEST_CASE("verify command") {
    VerifyOptions opt;
    opt.samples = 20;
    std::ostringstream out, js;
    CHECK(cmd_verify(opt, out, &js) == kExitOk);
    CHECK(out.str().find("verify: PASS") != std::string::npos);
    CHECK(json::parse(js.str())["pass"] == true);

    VerifyOptions broken = opt;
    FastScheme sc = FastScheme::strassen();
    sc.encode_a[6] = sc.encode_a[5];
    broken.scheme = sc;
    std::ostringstream bout;
    CHECK(cmd_verify(broken, bout, nullptr) == kExitFailure);

    VerifyOptions skip = opt;
    skip.max_vertices = 0;
    std::ostringstream sout;
    cmd_verify(skip, sout, nullptr);
    CHECK(sout.str().find("SKIPPED") != std::string::npos);
  }

  TEST_CASE("simulate json") {
    std::ostringstream out, err;
    REQUIRE(cmd_simulate({uniform_plan(8, 2), 8, 12, 1, std::nullopt}, out, err) == kExitOk);
    const json j = json::parse(out.str());
    CHECK(j["parsimonious"] == true);
    CHECK(j["io_total"].get<double>() >= j["bound"].get<double>());
    std::ostringstream bad;
    CHECK(cmd_simulate({uniform_plan(8, 2), 16, 12, 1, std::nullopt}, bad, err) == kExitUsage);
    CHECK(cmd_simulate({uniform_plan(8, 2), 8, 2, 1, std::nullopt}, bad, err) == kExitUsage);
  }
}
