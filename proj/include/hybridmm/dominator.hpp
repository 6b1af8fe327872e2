#pragma once

#include <cstddef>
#include <vector>

#include "hybridmm/cdag.hpp"

namespace hybridmm {

/// True when every path from a vertex of `sources` to a vertex of `targets`
/// contains a vertex of `d` (paths of length zero included).
bool is_dominator(const Cdag& g, const std::vector<VertexId>& d, const std::vector<VertexId>& targets,
                  const std::vector<VertexId>& sources);

/// Minimum dominator size of `targets` with respect to `sources`: a minimum
/// vertex cut computed by max-flow on the vertex-split graph. Any vertex,
/// including sources and targets, may be cut.
std::size_t min_dominator_size(const Cdag& g, const std::vector<VertexId>& targets,
                               const std::vector<VertexId>& sources);

/// Same quantity by trying vertex subsets in increasing size. Only vertices on
/// some source-to-target path are candidates; exponential in their number.
std::size_t exhaustive_min_dominator(const Cdag& g, const std::vector<VertexId>& targets,
                                     const std::vector<VertexId>& sources);

}  // namespace hybridmm
