#pragma once

#include "hybridmm/plan.hpp"
#include "hybridmm/schedule.hpp"

namespace hybridmm {

/// Largest power of two t <= n with 3t^2 <= M.
std::size_t blocked_tile(std::size_t n, std::uint64_t M);

/// Tiled triple loop over t x t tiles (loop order I, J, K); each C tile stays
/// resident across its K loop. Requires M >= 3.
void gen_standard_blocked_schedule(std::size_t n, MachineConfig cfg, MoveSink& sink);
Schedule gen_standard_blocked_schedule(std::size_t n, MachineConfig cfg);

/// Depth-first schedule for a hybrid plan. Each node picks the cheapest
/// strategy that fits in M:
///   in-cache   operands loaded once, whole sub-tree computed resident;
///   partial    A and C resident while B (or the encoded B_k) streams through;
///   streamed   encoded operands written to slow memory (or passed on as lazy
///              sums when cheaper), children recursed, products decoded.
/// In-cache and partial steps are first built as move lists; every slot is
/// evicted right after its last use, and the seven products run in the order
/// that keeps the fewest quadrants live.
/// A root standard leaf is delegated to gen_standard_blocked_schedule.
void gen_hybrid_schedule(const RecursionPlan& plan, MachineConfig cfg, MoveSink& sink);
Schedule gen_hybrid_schedule(const RecursionPlan& plan, MachineConfig cfg);

}  // namespace hybridmm
