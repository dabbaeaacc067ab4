#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "pcsma/graph.hpp"
#include "pcsma/sim.hpp"

namespace pcsma {

inline constexpr std::size_t kDefaultStateCap = 1'000'000;

struct SolveOptions {
    CollisionMode mode = CollisionMode::TimerRule;
    std::size_t state_cap = kDefaultStateCap;
    double tol = 1e-12;
    std::uint64_t max_iters = 1'000'000;
    // Cooperative wall-clock budget; loops abort with ResourceError past it.
    std::optional<std::chrono::steady_clock::time_point> deadline;
};

// Timer-vector states reachable from all-zero, in BFS discovery order.
// States are encoded as mixed-radix integers, base T per node, node 0 least
// significant; `index` maps an encoding back to its list position.
struct StateSpace {
    int n = 0;
    int T = 1;
    std::vector<std::uint8_t> timers;  // count * n, row i = state i
    std::unordered_map<std::uint64_t, std::int32_t> index;

    std::size_t count() const { return index.size(); }
    const std::uint8_t* state(std::size_t i) const { return timers.data() + i * n; }
    std::uint64_t encode(const std::uint8_t* state) const;
};

// Sparse row-stochastic one-step kernel in CSR form; row s lists
// (next-state index, probability) with probabilities summing to 1.
struct TransitionKernel {
    std::vector<std::size_t> row_start;  // rows + 1 entries
    std::vector<std::int32_t> next;
    std::vector<double> prob;

    std::size_t rows() const { return row_start.empty() ? 0 : row_start.size() - 1; }
    double row_sum(std::size_t s) const;
};

struct StationaryDistribution {
    std::vector<double> pi;
    double residual = 0.0;       // final ||P^T pi - pi||_inf
    std::uint64_t iterations = 0;
    bool damped = false;         // lazy-chain fallback engaged (periodic inputs)
};

struct ExactResult {
    std::vector<double> theta;
    std::size_t state_count = 0;
    double residual = 0.0;
    bool damped = false;
    CollisionMode mode = CollisionMode::TimerRule;
};

// Nodes that may attempt in `state`: idle, with every neighbor idle.
std::vector<int> eligible_set(const std::vector<int>& state, const ConflictGraph& g);

// One-step distribution out of `state`, summing over every attempt pattern of
// the eligible set. Returned rows are sorted by encoded next state.
std::vector<std::pair<std::vector<int>, double>> transition_row(
    const std::vector<int>& state, const NetworkInstance& inst,
    CollisionMode mode = CollisionMode::TimerRule);

// Breadth-first closure from the all-zero state under the transition support.
StateSpace enumerate_states(const NetworkInstance& inst, const SolveOptions& opts = {});

TransitionKernel build_kernel(const StateSpace& space, const NetworkInstance& inst,
                              const SolveOptions& opts = {});

// Power iteration from the uniform vector until ||P^T pi - pi||_inf <= tol.
// Switches to a damped (lazy-chain) update when plain iteration stalls, which
// leaves the fixed point unchanged but kills oscillation on periodic chains.
StationaryDistribution stationary(const TransitionKernel& kernel, double tol = 1e-12,
                                  std::uint64_t max_iters = 1'000'000);

// Exact per-node saturation throughput: theta_i = T * sum_s pi_s * r_i(s)
// with r_i(s) the collision-free start probability of node i in state s.
ExactResult throughput_exact(const NetworkInstance& inst, const SolveOptions& opts = {});

struct TimingProbe {
    double seconds = 0.0;
    bool timed_out = false;
    std::optional<ExactResult> result;  // present iff not timed out
};

// Runs throughput_exact under a wall-clock budget; a blown budget is a value,
// not an error.
TimingProbe mc_timing_probe(const NetworkInstance& inst, double budget_seconds,
                            SolveOptions opts = {});

} // namespace pcsma
