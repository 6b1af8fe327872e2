#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hybridmm/cdag.hpp"
#include "hybridmm/scheme.hpp"

namespace hybridmm {

/// Bipartite encoder gadget: 4 quadrant inputs, 7 outputs, an edge wherever
/// the coefficient row is nonzero.
struct EncoderGraph {
  std::array<std::array<bool, 4>, 7> adj{};
};

EncoderGraph encoder_graph(const FastScheme::EncodeMatrix& e);

/// True iff the 7 output neighborhoods are pairwise distinct.
bool verify_encoder_distinct_neighborhoods(const EncoderGraph& enc);

/// min{|Y|, 1 + ceil((|Y| - 1) / 2)}.
int connectivity_requirement(int y);

struct SubsetCheck {
  std::uint8_t subset = 0;  // bit k set: output k in Y
  int matching = 0;
  int required = 0;
  bool pass = false;
};

struct ConnectivityReport {
  std::vector<SubsetCheck> checks;  // all 127 nonempty subsets
  bool pass = true;
};

/// Maximum matching between each output subset Y and the inputs, compared
/// against connectivity_requirement(|Y|).
ConnectivityReport verify_encoder_connectivity(const EncoderGraph& enc);

struct DominatorSample {
  std::string lemma;
  std::string detail;
  std::size_t subset_size = 0;
  std::size_t min_dominator = 0;
  double bound = 0;
  bool pass = true;
};

struct LemmaReport {
  std::string lemma;
  std::size_t checked = 0;
  std::size_t violations = 0;
  double min_ratio = 0;  // smallest min_dominator / bound seen; 0 when nothing was checked
  std::vector<DominatorSample> failures;
  std::vector<std::string> notes;
  bool pass() const { return violations == 0; }
};

struct LemmaOptions {
  std::uint64_t seed = 1;
  std::size_t samples = 200;               // random subsets per family when not exhaustive
  std::uint64_t exhaustive_limit = 4096;   // enumerate every subset when the count is at most this
};

/// Type 2 outputs: every Z within the outputs of Type 2 MSPs with |Z| <= 4M
/// has a dominator (w.r.t. the global inputs) of size >= |Z| / 2.
LemmaReport verify_dominator_lemma_type2(const Cdag& g, std::uint64_t M, const LemmaOptions& opt = {});

/// Type 1 inputs: for Y within the inputs of Type 1 MSPs with y_i entries in
/// MSP i, the dominator (w.r.t. the global inputs) has size
/// >= min{2M, sqrt(sum y_i^2)}, the strongest choice a_i = b_i = y_i^2.
LemmaReport verify_dominator_lemma_type1_inputs(const Cdag& g, std::uint64_t M, const LemmaOptions& opt = {});

/// Elementary products: for T' within one Type 1 MSP, the dominator with
/// respect to that MSP's inputs has size >= max{|A entries used|, |B entries used|}.
LemmaReport verify_dominator_lemma_type1_products(const Cdag& g, std::uint64_t M, const LemmaOptions& opt = {});

/// Both Type 1 checks above merged into one report.
LemmaReport verify_dominator_lemma_type1(const Cdag& g, std::uint64_t M, const LemmaOptions& opt = {});

std::string lemma_report_to_json(const LemmaReport& r);

}  // namespace hybridmm
