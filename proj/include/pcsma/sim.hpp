#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pcsma/graph.hpp"

namespace pcsma {

// What happens to nodes whose attempts collide.
//   TimerRule: colliders keep timer 0 and re-contend next slot (matches the
//              exact chain's timer update; the default everywhere).
//   HoldT:     colliders occupy the channel for T slots without a success.
// Solver and simulator must run the same mode; dataset rows record it.
enum class CollisionMode { TimerRule, HoldT };

const char* to_string(CollisionMode mode);
CollisionMode collision_mode_from_string(const std::string& s);

struct SimResult {
    std::vector<double> theta_hat;            // success_starts[i] * T / slots
    std::vector<std::uint64_t> success_starts;
    std::uint64_t slots = 0;
    std::uint64_t seed = 0;
};

// Per-slot observer for tests; receives the slot index and the winner set.
using SlotObserver = std::function<void(std::uint64_t slot, const std::vector<int>& winners)>;

// Slot-synchronous Monte Carlo of saturated heterogeneous p-CSMA.
// Deterministic given (inst, slots, seed, mode): eligible nodes draw their
// attempt Bernoulli in ascending node order and blocked or busy nodes consume
// no draw.
SimResult simulate(const NetworkInstance& inst, std::uint64_t slots, std::uint64_t seed,
                   CollisionMode mode = CollisionMode::TimerRule,
                   const SlotObserver* observer = nullptr);

// Poisson-approximation sampling error of a throughput estimate.
double standard_error(double theta_hat, int T, std::uint64_t slots);

// 95% confidence half-width, 1.96 * SE.
double ci_half_width(double theta_hat, int T, std::uint64_t slots);

} // namespace pcsma
