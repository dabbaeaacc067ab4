#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <vector>

#include "pcsma/errors.hpp"
#include "pcsma/markov.hpp"
#include "pcsma/rng.hpp"
#include "pcsma/sim.hpp"

#include "dense_oracle.hpp"

using namespace pcsma;

namespace {

NetworkInstance single_node(double p, int T) {
    return NetworkInstance{ConflictGraph(1, {}), {p}, T};
}

using Row = std::map<std::vector<int>, double>;

Row row_of(const std::vector<int>& state, const NetworkInstance& inst,
           CollisionMode mode = CollisionMode::TimerRule) {
    Row row;
    for (const auto& [next, prob] : transition_row(state, inst, mode)) row[next] = prob;
    return row;
}

using oracle::dense_throughput;

} // namespace

TEST_CASE("eligible set on the canonical path states") {
    const ConflictGraph empty3(3, {});
    CHECK(eligible_set({0, 0, 0}, empty3) == std::vector<int>{0, 1, 2});

    const ConflictGraph path(3, {{0, 1}, {1, 2}});
    CHECK(eligible_set({0, 1, 0}, path).empty());
    CHECK(eligible_set({1, 0, 0}, path) == std::vector<int>{2});
}

TEST_CASE("single-node transition rows") {
    const auto inst = single_node(0.5, 2);
    const Row from_idle = row_of({0}, inst);
    REQUIRE(from_idle.size() == 2);
    CHECK(from_idle.at({0}) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(from_idle.at({1}) == doctest::Approx(0.5).epsilon(1e-14));

    const Row from_busy = row_of({1}, inst);
    REQUIRE(from_busy.size() == 1);
    CHECK(from_busy.at({0}) == 1.0);
}

TEST_CASE("adjacent pair from all-idle: hand-enumerated four patterns") {
    const ConflictGraph pair(2, {{0, 1}});
    const NetworkInstance inst{pair, {0.5, 0.5}, 2};
    const Row row = row_of({0, 0}, inst);
    REQUIRE(row.size() == 3);
    CHECK(row.at({1, 0}) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(row.at({0, 1}) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(row.at({0, 0}) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("hold-T sends colliders busy together") {
    const ConflictGraph pair(2, {{0, 1}});
    const NetworkInstance inst{pair, {0.5, 0.5}, 2};
    const Row row = row_of({0, 0}, inst, CollisionMode::HoldT);
    REQUIRE(row.size() == 4);
    CHECK(row.at({1, 1}) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(row.at({0, 0}) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("reachable state enumeration") {
    SUBCASE("single node, T=3") {
        const auto space = enumerate_states(single_node(0.5, 3));
        CHECK(space.count() == 3);
        CHECK(space.state(0)[0] == 0);
    }
    SUBCASE("adjacent pair, T=2: both-busy unreachable under timer-rule") {
        const ConflictGraph pair(2, {{0, 1}});
        const auto space = enumerate_states(NetworkInstance{pair, {0.5, 0.5}, 2});
        CHECK(space.count() == 3);
    }
    SUBCASE("non-adjacent pair, T=2: all four states reachable") {
        const ConflictGraph two(2, {});
        const auto space = enumerate_states(NetworkInstance{two, {0.5, 0.5}, 2});
        CHECK(space.count() == 4);
    }
}

TEST_CASE("kernel rows are stochastic on random instances") {
    Rng rng(1234);
    for (int trial = 0; trial < 10; ++trial) {
        const auto g = erdos_renyi(5, 0.5, 8800 + trial);
        NetworkInstance inst{g, {}, 3};
        for (int i = 0; i < 5; ++i) inst.p.push_back(rng.next_double());
        const auto space = enumerate_states(inst);
        const auto kernel = build_kernel(space, inst);
        for (std::size_t s = 0; s < kernel.rows(); ++s) {
            CHECK(std::abs(kernel.row_sum(s) - 1.0) <= 1e-12);
            for (std::size_t k = kernel.row_start[s]; k < kernel.row_start[s + 1]; ++k) {
                CHECK(kernel.prob[k] >= 0.0);
            }
        }
    }
}

TEST_CASE("stationary solver on tiny hand-solved chains") {
    SUBCASE("identity kernel") {
        TransitionKernel k;
        k.row_start = {0, 1};
        k.next = {0};
        k.prob = {1.0};
        const auto d = stationary(k);
        REQUIRE(d.pi.size() == 1);
        CHECK(d.pi[0] == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("single node p=0.5 T=2: balance gives [2/3, 1/3]") {
        TransitionKernel k;
        k.row_start = {0, 2, 3};
        k.next = {0, 1, 0};
        k.prob = {0.5, 0.5, 1.0};
        const auto d = stationary(k);
        CHECK(d.pi[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
        CHECK(d.pi[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
        CHECK(d.residual <= 1e-12);
    }
    SUBCASE("doubly stochastic two-state chain is uniform") {
        TransitionKernel k;
        k.row_start = {0, 2, 4};
        k.next = {0, 1, 0, 1};
        k.prob = {0.3, 0.7, 0.7, 0.3};
        const auto d = stationary(k);
        CHECK(d.pi[0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(d.pi[1] == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("stationarity residual is honored on a random instance") {
    const auto g = erdos_renyi(5, 0.5, 321);
    NetworkInstance inst{g, {0.31, 0.62, 0.17, 0.88, 0.45}, 3};
    const auto space = enumerate_states(inst);
    const auto kernel = build_kernel(space, inst);
    const auto dist = stationary(kernel, 1e-12);

    // Recompute ||P^T pi - pi||_inf from scratch.
    std::vector<double> image(dist.pi.size(), 0.0);
    for (std::size_t s = 0; s < kernel.rows(); ++s) {
        for (std::size_t k = kernel.row_start[s]; k < kernel.row_start[s + 1]; ++k) {
            image[kernel.next[k]] += dist.pi[s] * kernel.prob[k];
        }
    }
    double residual = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < image.size(); ++i) {
        residual = std::max(residual, std::abs(image[i] - dist.pi[i]));
        total += dist.pi[i];
        CHECK(dist.pi[i] >= 0.0);
    }
    CHECK(residual <= 1e-12);
    CHECK(std::abs(total - 1.0) <= 1e-10);
}

TEST_CASE("exact throughput: single node closed form") {
    const auto r = throughput_exact(single_node(0.5, 2));
    REQUIRE(r.theta.size() == 1);
    CHECK(std::abs(r.theta[0] - 2.0 / 3.0) <= 1e-10);
    CHECK(r.state_count == 2);
}

TEST_CASE("exact throughput: zero attempt probability means zero throughput") {
    const ConflictGraph pair(2, {{0, 1}});
    const auto r = throughput_exact(NetworkInstance{pair, {0.0, 0.7}, 3});
    CHECK(r.theta[0] == 0.0);
    CHECK(r.theta[1] > 0.0);
}

TEST_CASE("exact throughput: adjacent pair at T=1") {
    const ConflictGraph pair(2, {{0, 1}});
    const auto r = throughput_exact(NetworkInstance{pair, {0.5, 0.5}, 1});
    CHECK(std::abs(r.theta[0] - 0.25) <= 1e-12);
    CHECK(std::abs(r.theta[1] - 0.25) <= 1e-12);
    CHECK(r.state_count == 1);
}

TEST_CASE("closed-form sweep: isolated node renewal formula") {
    for (double p : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        for (int T = 1; T <= 5; ++T) {
            const auto r = throughput_exact(single_node(p, T));
            const double expected = T * p / (1.0 - p + T * p);
            CHECK(std::abs(r.theta[0] - expected) <= 1e-10);
        }
    }
}

TEST_CASE("degenerate probabilities solve without divergence") {
    SUBCASE("always-attempting isolated node is periodic: damped fallback") {
        const auto r = throughput_exact(single_node(1.0, 3));
        CHECK(std::abs(r.theta[0] - 1.0) <= 1e-9);
    }
    SUBCASE("always-attempting adjacent pair never wins") {
        const ConflictGraph pair(2, {{0, 1}});
        const auto r = throughput_exact(NetworkInstance{pair, {1.0, 1.0}, 2});
        CHECK(r.theta[0] == 0.0);
        CHECK(r.theta[1] == 0.0);
    }
}

TEST_CASE("dense full-space oracle agrees with the pruned sparse solver") {
    Rng rng(777);
    for (int n = 1; n <= 3; ++n) {
        for (int T = 1; T <= 3; ++T) {
            for (int trial = 0; trial < 25; ++trial) {
                const auto g = erdos_renyi(n, 0.5, 10000 + 100 * n + 10 * T + trial);
                NetworkInstance inst{g, {}, T};
                for (int i = 0; i < n; ++i) inst.p.push_back(rng.next_double());
                const auto expected = dense_throughput(inst, CollisionMode::TimerRule);
                const auto got = throughput_exact(inst).theta;
                for (int i = 0; i < n; ++i) {
                    CHECK(std::abs(expected[i] - got[i]) <= 1e-10);
                }
            }
        }
    }
}

TEST_CASE("dense oracle agreement holds under hold-T as well") {
    Rng rng(778);
    SolveOptions opts;
    opts.mode = CollisionMode::HoldT;
    for (int trial = 0; trial < 10; ++trial) {
        const auto g = erdos_renyi(3, 0.5, 20000 + trial);
        NetworkInstance inst{g, {}, 3};
        for (int i = 0; i < 3; ++i) inst.p.push_back(rng.next_double());
        const auto expected = dense_throughput(inst, CollisionMode::HoldT);
        const auto got = throughput_exact(inst, opts).theta;
        for (int i = 0; i < 3; ++i) {
            CHECK(std::abs(expected[i] - got[i]) <= 1e-10);
        }
    }
}

TEST_CASE("adding an edge never helps its endpoints") {
    Rng rng(779);
    for (int trial = 0; trial < 10; ++trial) {
        const auto g = erdos_renyi(5, 0.4, 30000 + trial);
        NetworkInstance inst{g, {}, 2};
        for (int i = 0; i < 5; ++i) inst.p.push_back(rng.next_double());
        const auto base = throughput_exact(inst).theta;

        // Add one absent edge (u, v); only the endpoints are guaranteed to
        // suffer. A third node can benefit when the new edge suppresses one
        // of its competitors.
        int u = -1, v = -1;
        for (int a = 0; a < 5 && u < 0; ++a) {
            for (int b = a + 1; b < 5 && u < 0; ++b) {
                if (!g.adjacent(a, b)) { u = a; v = b; }
            }
        }
        if (u < 0) continue;  // complete graph, nothing to add
        auto edges = g.edges();
        edges.emplace_back(u, v);
        NetworkInstance denser{ConflictGraph(5, edges), inst.p, inst.T};
        const auto with_edge = throughput_exact(denser).theta;
        CHECK(with_edge[u] <= base[u] + 1e-10);
        CHECK(with_edge[v] <= base[v] + 1e-10);
    }
}

TEST_CASE("simulator and exact solver agree on a random instance") {
    const auto g = erdos_renyi(4, 0.5, 4242);
    NetworkInstance inst{g, {0.42, 0.77, 0.15, 0.63}, 2};
    const auto exact = throughput_exact(inst).theta;
    const std::uint64_t slots = 400'000;
    const auto sim = simulate(inst, slots, 515);
    for (int i = 0; i < 4; ++i) {
        const double tol = std::max(3.0 * standard_error(exact[i], inst.T, slots), 4e-3);
        CHECK(std::abs(sim.theta_hat[i] - exact[i]) <= tol);
    }
}

TEST_CASE("state cap is enforced before any work") {
    const auto g = erdos_renyi(12, 0.5, 5);
    NetworkInstance inst{g, std::vector<double>(12, 0.5), 5};
    CHECK_THROWS_AS(enumerate_states(inst), ResourceError);
    try {
        enumerate_states(inst);
    } catch (const ResourceError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("cap") != std::string::npos);
        CHECK(msg.find("5^12") != std::string::npos);
    }
}

TEST_CASE("timing probe completes quickly on a small instance") {
    const auto g = erdos_renyi(5, 0.5, 60);
    NetworkInstance inst{g, {0.2, 0.4, 0.6, 0.8, 0.5}, 2};
    const auto probe = mc_timing_probe(inst, 1000.0);
    CHECK_FALSE(probe.timed_out);
    CHECK(probe.seconds > 0.0);
    CHECK(probe.seconds < 1.0);
    REQUIRE(probe.result.has_value());
    CHECK(probe.result->theta.size() == 5);
}

TEST_CASE("timing probe reports a blown budget as a marker, not an error") {
    const auto g = erdos_renyi(6, 0.5, 61);
    NetworkInstance inst{g, std::vector<double>(6, 0.5), 3};
    const auto probe = mc_timing_probe(inst, 1e-9);
    CHECK(probe.timed_out);
    CHECK_FALSE(probe.result.has_value());
}
