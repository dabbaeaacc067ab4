#include "pcsma/numopt.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include "pcsma/autodiff.hpp"
#include "pcsma/errors.hpp"

namespace pcsma {

const char* to_string(Backend backend) {
    return backend == Backend::McFd ? "mc-fd" : "dgcn-backprop";
}

Backend backend_from_string(const std::string& s) {
    if (s == "mc-fd") return Backend::McFd;
    if (s == "dgcn-backprop") return Backend::DgcnBackprop;
    throw ValidationError("unknown backend '" + s + "' (mc-fd | dgcn-backprop)");
}

void UtilityProblem::require_valid() const {
    const int n = graph.n();
    if (static_cast<int>(alpha.size()) != n || static_cast<int>(p_init.size()) != n) {
        throw ValidationError("alpha/p_init length must equal the node count");
    }
    for (double a : alpha) {
        if (!(a >= 0.0)) throw ValidationError("alpha entries must be >= 0");
    }
    for (double p : p_init) {
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("p_init entries must be in [0,1]");
    }
    if (!(eps > 0.0)) throw ValidationError("eps must be > 0");
    if (T < 1) throw ValidationError("T must be >= 1");
    if (iters < 0) throw ValidationError("iteration count must be >= 0");
    if (!(fd_step > 0.0)) throw ValidationError("fd_step must be > 0");
}

double utility(const std::vector<double>& theta, const std::vector<double>& alpha, double eps) {
    if (theta.size() != alpha.size()) throw ValidationError("utility: length mismatch");
    double J = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        J += alpha[i] * std::log(theta[i] + eps);
    }
    return J;
}

namespace {

std::vector<double> mc_theta(const UtilityProblem& problem, const std::vector<double>& p) {
    SolveOptions opts;
    opts.mode = problem.mode;
    opts.state_cap = problem.state_cap;
    return throughput_exact(NetworkInstance{problem.graph, p, problem.T}, opts).theta;
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

} // namespace

Trajectory optimize_mc(const UtilityProblem& problem) {
    problem.require_valid();
    const auto start = std::chrono::steady_clock::now();
    const int n = problem.graph.n();
    const double h = problem.fd_step;

    Trajectory traj;
    traj.backend = Backend::McFd;
    std::vector<double> p = problem.p_init;

    auto J_at = [&](const std::vector<double>& probe) {
        return utility(mc_theta(problem, probe), problem.alpha, problem.eps);
    };

    for (int iter = 0; iter <= problem.iters; ++iter) {
        const auto theta = mc_theta(problem, p);
        const double J = utility(theta, problem.alpha, problem.eps);
        traj.points.push_back({iter, p, theta, J});
        if (iter == problem.iters) break;

        // Central differences per coordinate, falling back to one-sided when
        // a perturbation would leave [0,1].
        std::vector<double> grad(n, 0.0);
        auto fill_coordinate = [&](int i) {
            std::vector<double> probe = p;
            const bool up_ok = p[i] + h <= 1.0;
            const bool down_ok = p[i] - h >= 0.0;
            if (up_ok && down_ok) {
                probe[i] = p[i] + h;
                const double up = J_at(probe);
                probe[i] = p[i] - h;
                const double down = J_at(probe);
                grad[i] = (up - down) / (2.0 * h);
            } else if (up_ok) {
                probe[i] = p[i] + h;
                grad[i] = (J_at(probe) - J) / h;
            } else {
                probe[i] = p[i] - h;
                grad[i] = (J - J_at(probe)) / h;
            }
        };

        const int workers = std::max(1, problem.threads);
        if (workers == 1) {
            for (int i = 0; i < n; ++i) fill_coordinate(i);
        } else {
            std::vector<std::thread> pool;
            std::atomic<int> next{0};
            for (int w = 0; w < std::min(workers, n); ++w) {
                pool.emplace_back([&] {
                    for (;;) {
                        const int i = next.fetch_add(1);
                        if (i >= n) return;
                        fill_coordinate(i);
                    }
                });
            }
            for (auto& t : pool) t.join();
        }

        for (int i = 0; i < n; ++i) p[i] = clamp01(p[i] + problem.lr * grad[i]);
    }

    traj.final_p = traj.points.back().p;
    traj.final_J = traj.points.back().J;
    traj.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return traj;
}

Trajectory optimize_gnn(const UtilityProblem& problem, const ModelParameters& model) {
    problem.require_valid();
    const auto start = std::chrono::steady_clock::now();
    const int n = problem.graph.n();
    const int d = model.config.input_dim();

    Trajectory traj;
    traj.backend = Backend::DgcnBackprop;
    std::vector<double> p = problem.p_init;

    ad::Tape tape;
    for (int iter = 0; iter <= problem.iters; ++iter) {
        tape.reset();
        const NetworkInstance inst{problem.graph, p, problem.T};
        const TapeModel fwd = build_forward(tape, model, inst);
        const ad::NodeId alpha_leaf = tape.leaf(n, 1, problem.alpha);
        const ad::NodeId J_node =
            tape.sum(tape.mul(alpha_leaf, tape.log_eps(fwd.output, problem.eps)));

        const auto theta_span = tape.value(fwd.output);
        const double J = tape.scalar_value(J_node);
        traj.points.push_back({iter, p, {theta_span.begin(), theta_span.end()}, J});
        if (iter == problem.iters) break;

        // Ascent direction through the model: gradient with respect to the
        // p feature column only; model parameters stay frozen.
        tape.backward(J_node);
        const auto feature_grad = tape.grad(fwd.features);
        for (int i = 0; i < n; ++i) {
            p[i] = clamp01(p[i] + problem.lr * feature_grad[static_cast<std::size_t>(i) * d]);
        }
    }

    traj.final_p = traj.points.back().p;
    traj.final_J = traj.points.back().J;

    // Re-evaluate the endpoint under the exact chain when tractable.
    const double full_states = std::pow(static_cast<double>(problem.T), n);
    if (full_states <= static_cast<double>(problem.state_cap)) {
        traj.mc_eval_J = utility(mc_theta(problem, traj.final_p), problem.alpha, problem.eps);
    }

    traj.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return traj;
}

BackendBench bench_backends(const UtilityProblem& problem, const ModelParameters& model) {
    BackendBench bench;
    bench.iters = problem.iters;

    UtilityProblem mc_problem = problem;
    mc_problem.backend = Backend::McFd;
    const Trajectory mc = optimize_mc(mc_problem);
    bench.mc_seconds = mc.wall_seconds;
    bench.mc_final_J = mc.final_J;

    UtilityProblem gnn_problem = problem;
    gnn_problem.backend = Backend::DgcnBackprop;
    const Trajectory gnn = optimize_gnn(gnn_problem, model);
    bench.gnn_seconds = gnn.wall_seconds;
    bench.gnn_final_J = gnn.final_J;
    return bench;
}

} // namespace pcsma
