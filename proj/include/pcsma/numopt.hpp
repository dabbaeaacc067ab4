#pragma once

#include <optional>
#include <vector>

#include "pcsma/gnn.hpp"
#include "pcsma/graph.hpp"
#include "pcsma/markov.hpp"

namespace pcsma {

enum class Backend { McFd, DgcnBackprop };

const char* to_string(Backend backend);
Backend backend_from_string(const std::string& s);

// Maximize J(p) = sum_i alpha_i log(theta_i(p) + eps) over p in [0,1]^n by
// projected gradient ascent, with the throughput map supplied either by the
// exact chain (finite differences) or a trained model (backpropagation).
struct UtilityProblem {
    ConflictGraph graph;
    int T = 2;
    std::vector<double> alpha;
    double eps = 1e-9;
    std::vector<double> p_init;
    double lr = 0.01;
    int iters = 100;
    Backend backend = Backend::McFd;
    double fd_step = 1e-4;
    CollisionMode mode = CollisionMode::TimerRule;
    std::size_t state_cap = kDefaultStateCap;
    int threads = 1;  // parallel finite-difference coordinate solves

    void require_valid() const;
};

struct TrajectoryPoint {
    int iter = 0;
    std::vector<double> p;
    std::vector<double> theta;  // under the backend's throughput map
    double J = 0.0;
};

struct Trajectory {
    Backend backend = Backend::McFd;
    std::vector<TrajectoryPoint> points;  // iters + 1 entries, point 0 = p_init
    std::vector<double> final_p;
    double final_J = 0.0;
    // Exact-chain utility at the learned backend's final p, when the state
    // space permits re-evaluation.
    std::optional<double> mc_eval_J;
    double wall_seconds = 0.0;
};

double utility(const std::vector<double>& theta, const std::vector<double>& alpha, double eps);

Trajectory optimize_mc(const UtilityProblem& problem);

Trajectory optimize_gnn(const UtilityProblem& problem, const ModelParameters& model);

struct BackendBench {
    double mc_seconds = 0.0;
    double gnn_seconds = 0.0;
    double mc_final_J = 0.0;
    double gnn_final_J = 0.0;
    int iters = 0;
};

// Wall time per backend for identical iteration budgets on one problem.
BackendBench bench_backends(const UtilityProblem& problem, const ModelParameters& model);

} // namespace pcsma
