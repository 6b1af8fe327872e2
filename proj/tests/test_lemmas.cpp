#include <algorithm>

#include "doctest.h"
#include "hybridmm/cdag.hpp"
#include "hybridmm/dominator.hpp"
#include "hybridmm/lemmas.hpp"
#include "hybridmm/msp.hpp"

using namespace hybridmm;

TEST_SUITE("lemmas") {
  TEST_CASE("connectivity requirement") {
    CHECK(connectivity_requirement(1) == 1);
    CHECK(connectivity_requirement(2) == 2);
    CHECK(connectivity_requirement(3) == 2);
    CHECK(connectivity_requirement(4) == 3);
    CHECK(connectivity_requirement(7) == 4);
  }

  TEST_CASE("built-in encoders pass both checks") {
    for (const FastScheme* sc : {&FastScheme::strassen(), &FastScheme::winograd()})
      for (const auto* e : {&sc->encode_a, &sc->encode_b}) {
        const EncoderGraph g = encoder_graph(*e);
        CHECK(verify_encoder_distinct_neighborhoods(g));
        const ConnectivityReport r = verify_encoder_connectivity(g);
        CHECK(r.checks.size() == 127);
        CHECK(r.pass);
        for (const SubsetCheck& c : r.checks) {
          CHECK(c.matching <= 4);
          CHECK(c.matching >= c.required);
        }
      }
  }

  TEST_CASE("a duplicated encoder row is caught") {
    FastScheme::EncodeMatrix e = FastScheme::strassen().encode_a;
    e[6] = e[5];
    CHECK_FALSE(verify_encoder_distinct_neighborhoods(encoder_graph(e)));
    // Seven outputs all reading only the first quadrant cannot be matched beyond 1.
    FastScheme::EncodeMatrix narrow{};
    for (auto& row : narrow) row[0] = 1;
    const ConnectivityReport r = verify_encoder_connectivity(encoder_graph(narrow));
    CHECK_FALSE(r.pass);
    for (const SubsetCheck& c : r.checks) CHECK(c.matching == 1);
  }

  TEST_CASE("exhaustive checks on a small fast cdag") {
    const Cdag g = build_cdag(uniform_plan(4, 1));
    LemmaOptions opt;
    opt.exhaustive_limit = 1u << 20;
    for (std::uint64_t M : {1, 4}) {
      const LemmaReport t2 = verify_dominator_lemma_type2(g, M, opt);
      CHECK(t2.pass());
      CHECK(t2.failures.empty());
    }
    const LemmaReport t2 = verify_dominator_lemma_type2(g, 1, opt);
    CHECK(t2.checked > 0);
    CHECK(t2.min_ratio >= 1.0);
  }

  TEST_CASE("standard leaves") {
    const Cdag g = build_cdag(uniform_plan(4, 4));
    // The root leaf is the only MSP at M = 1.
    REQUIRE(enumerate_msps(*g.plan, 1).size() == 1);
    const LemmaReport prods = verify_dominator_lemma_type1_products(g, 1, {});
    CHECK(prods.pass());
    CHECK(prods.checked > 0);
    const LemmaReport ins = verify_dominator_lemma_type1_inputs(g, 1, {});
    CHECK(ins.pass());

    // The four products of one output need four vertices to cut from the inputs.
    const SubProblemVertices& root = g.root();
    std::vector<VertexId> t, sources = root.a_in;
    sources.insert(sources.end(), root.b_in.begin(), root.b_in.end());
    for (const ElemProductRef& p : root.products)
      if (p.i == 1 && p.j == 2) t.push_back(p.vertex);
    REQUIRE(t.size() == 4);
    CHECK(min_dominator_size(g, t, sources) == 4);
    // All 32 global inputs of a standard 4x4 product are cut by the 16 outputs, not fewer.
    CHECK(min_dominator_size(g, g.global_outputs(), g.global_inputs()) == 16);
  }

  TEST_CASE("hybrid plans pass sampled checks") {
    LemmaOptions opt;
    opt.samples = 40;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const Cdag g = build_cdag(random_plan(8, 0.6, seed));
      for (std::uint64_t M : {1, 4}) {
        CHECK(verify_dominator_lemma_type2(g, M, opt).pass());
        CHECK(verify_dominator_lemma_type1_inputs(g, M, opt).pass());
        CHECK(verify_dominator_lemma_type1_products(g, M, opt).pass());
      }
    }
  }

  TEST_CASE("combined type 1 report") {
    const Cdag g = build_cdag(random_plan(8, 0.5, 2));
    LemmaOptions opt;
    opt.samples = 30;
    const LemmaReport ins = verify_dominator_lemma_type1_inputs(g, 1, opt);
    const LemmaReport prods = verify_dominator_lemma_type1_products(g, 1, opt);
    const LemmaReport both = verify_dominator_lemma_type1(g, 1, opt);
    CHECK(both.checked == ins.checked + prods.checked);
    CHECK(both.violations == 0);
    CHECK(both.min_ratio == doctest::Approx(std::min(ins.min_ratio, prods.min_ratio)));
  }

  TEST_CASE("report json") {
    const Cdag g = build_cdag(uniform_plan(4, 2));
    const std::string j = lemma_report_to_json(verify_dominator_lemma_type2(g, 1, {}));
    CHECK(j.find("\"lemma\"") != std::string::npos);
    CHECK(j.find("\"violations\"") != std::string::npos);
  }
}
