#include "pcsma/markov.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pcsma/errors.hpp"

namespace pcsma {

namespace {

// Internal marker so mc_timing_probe can tell a blown budget apart from a
// genuine resource failure.
struct DeadlineExceeded : ResourceError {
    DeadlineExceeded() : ResourceError("wall-clock budget exceeded") {}
};

void check_deadline(const SolveOptions& opts) {
    if (opts.deadline && std::chrono::steady_clock::now() > *opts.deadline) {
        throw DeadlineExceeded();
    }
}

std::vector<std::uint64_t> radix_powers(int n, int T) {
    std::vector<std::uint64_t> pow(n);
    std::uint64_t v = 1;
    for (int i = 0; i < n; ++i) {
        pow[i] = v;
        v *= static_cast<std::uint64_t>(T);
    }
    return pow;
}

struct RowScratch {
    std::vector<int> eligible;
    std::vector<std::uint32_t> nbr_mask;  // eligible-index bitmask of attacking neighbors
    std::vector<std::pair<std::uint64_t, double>> entries;
};

// Enumerates every attempt pattern of the eligible set and accumulates the
// merged next-state distribution, keyed by mixed-radix state code.
void transition_codes(const std::uint8_t* state, const NetworkInstance& inst,
                      CollisionMode mode, const std::vector<std::uint64_t>& pow,
                      RowScratch& scratch,
                      std::vector<std::pair<std::uint64_t, double>>& out) {
    const ConflictGraph& g = inst.graph;
    const int n = g.n();
    const std::uint64_t reset = static_cast<std::uint64_t>(inst.T - 1);

    std::uint64_t base = 0;
    for (int i = 0; i < n; ++i) {
        if (state[i] > 0) base += static_cast<std::uint64_t>(state[i] - 1) * pow[i];
    }

    auto& eligible = scratch.eligible;
    eligible.clear();
    for (int i = 0; i < n; ++i) {
        if (state[i] != 0) continue;
        bool blocked = false;
        for (int j : g.neighbors(i)) {
            if (state[j] != 0) { blocked = true; break; }
        }
        if (!blocked) eligible.push_back(i);
    }

    const int m = static_cast<int>(eligible.size());
    if (m > 30) {
        throw ResourceError("attempt-pattern enumeration over " + std::to_string(m) +
                            " eligible nodes exceeds the 2^30 pattern limit");
    }

    auto& nbr_mask = scratch.nbr_mask;
    nbr_mask.assign(m, 0);
    for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
            if (b != a && g.adjacent(eligible[a], eligible[b])) nbr_mask[a] |= 1u << b;
        }
    }

    auto& entries = scratch.entries;
    entries.clear();
    const std::uint32_t patterns = 1u << m;
    for (std::uint32_t mask = 0; mask < patterns; ++mask) {
        double prob = 1.0;
        for (int a = 0; a < m; ++a) {
            const double p = inst.p[eligible[a]];
            prob *= (mask >> a) & 1u ? p : 1.0 - p;
            if (prob == 0.0) break;
        }
        if (prob == 0.0) continue;

        std::uint64_t code = base;
        for (int a = 0; a < m; ++a) {
            if (!((mask >> a) & 1u)) continue;
            const bool wins = (nbr_mask[a] & mask) == 0;
            if (wins || mode == CollisionMode::HoldT) {
                code += reset * pow[eligible[a]];
            }
        }
        entries.emplace_back(code, prob);
    }

    std::sort(entries.begin(), entries.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    out.clear();
    for (const auto& [code, prob] : entries) {
        if (!out.empty() && out.back().first == code) {
            out.back().second += prob;
        } else {
            out.emplace_back(code, prob);
        }
    }
}

void decode(std::uint64_t code, int n, int T, std::uint8_t* out) {
    for (int i = 0; i < n; ++i) {
        out[i] = static_cast<std::uint8_t>(code % static_cast<std::uint64_t>(T));
        code /= static_cast<std::uint64_t>(T);
    }
}

void require_state_cap(const NetworkInstance& inst, const SolveOptions& opts) {
    const double full = std::pow(static_cast<double>(inst.T), inst.graph.n());
    if (full > static_cast<double>(opts.state_cap)) {
        std::ostringstream msg;
        msg << "state cap " << opts.state_cap << " exceeded: T^n = " << inst.T << "^"
            << inst.graph.n() << " = " << full << " states";
        throw ResourceError(msg.str());
    }
}

} // namespace

std::uint64_t StateSpace::encode(const std::uint8_t* state) const {
    std::uint64_t code = 0;
    std::uint64_t mul = 1;
    for (int i = 0; i < n; ++i) {
        code += state[i] * mul;
        mul *= static_cast<std::uint64_t>(T);
    }
    return code;
}

double TransitionKernel::row_sum(std::size_t s) const {
    double sum = 0.0;
    for (std::size_t k = row_start[s]; k < row_start[s + 1]; ++k) sum += prob[k];
    return sum;
}

std::vector<int> eligible_set(const std::vector<int>& state, const ConflictGraph& g) {
    if (static_cast<int>(state.size()) != g.n()) {
        throw ValidationError("state length " + std::to_string(state.size()) +
                              " != node count " + std::to_string(g.n()));
    }
    std::vector<int> result;
    for (int i = 0; i < g.n(); ++i) {
        if (state[i] != 0) continue;
        bool blocked = false;
        for (int j : g.neighbors(i)) {
            if (state[j] != 0) { blocked = true; break; }
        }
        if (!blocked) result.push_back(i);
    }
    return result;
}

std::vector<std::pair<std::vector<int>, double>> transition_row(const std::vector<int>& state,
                                                                const NetworkInstance& inst,
                                                                CollisionMode mode) {
    inst.require_valid();
    const int n = inst.graph.n();
    if (static_cast<int>(state.size()) != n) {
        throw ValidationError("state length mismatch");
    }
    std::vector<std::uint8_t> s(n);
    for (int i = 0; i < n; ++i) {
        if (state[i] < 0 || state[i] >= inst.T) {
            throw ValidationError("state entry " + std::to_string(state[i]) +
                                  " outside {0,...,T-1}");
        }
        s[i] = static_cast<std::uint8_t>(state[i]);
    }

    const auto pow = radix_powers(n, inst.T);
    RowScratch scratch;
    std::vector<std::pair<std::uint64_t, double>> codes;
    transition_codes(s.data(), inst, mode, pow, scratch, codes);

    std::vector<std::pair<std::vector<int>, double>> row;
    row.reserve(codes.size());
    std::vector<std::uint8_t> buf(n);
    for (const auto& [code, prob] : codes) {
        decode(code, n, inst.T, buf.data());
        row.emplace_back(std::vector<int>(buf.begin(), buf.end()), prob);
    }
    return row;
}

StateSpace enumerate_states(const NetworkInstance& inst, const SolveOptions& opts) {
    inst.require_valid();
    require_state_cap(inst, opts);

    const int n = inst.graph.n();
    StateSpace space;
    space.n = n;
    space.T = inst.T;

    const auto pow = radix_powers(n, inst.T);
    space.timers.assign(n, 0);  // all-zero state, index 0
    space.index.emplace(0, 0);

    RowScratch scratch;
    std::vector<std::pair<std::uint64_t, double>> codes;
    std::vector<std::uint8_t> buf(n);

    for (std::size_t head = 0; head * n < space.timers.size(); ++head) {
        if ((head & 0xFF) == 0) check_deadline(opts);
        // Pointer into timers may dangle across push_backs; copy the state.
        std::copy_n(space.timers.data() + head * n, n, buf.data());
        transition_codes(buf.data(), inst, opts.mode, pow, scratch, codes);
        for (const auto& [code, prob] : codes) {
            (void)prob;
            if (space.index.contains(code)) continue;
            const auto idx = static_cast<std::int32_t>(space.count());
            space.index.emplace(code, idx);
            const std::size_t off = space.timers.size();
            space.timers.resize(off + n);
            decode(code, n, inst.T, space.timers.data() + off);
            if (space.count() > opts.state_cap) {
                std::ostringstream msg;
                msg << "state cap " << opts.state_cap << " exceeded during enumeration (T^n = "
                    << std::pow(static_cast<double>(inst.T), n) << ")";
                throw ResourceError(msg.str());
            }
        }
    }
    return space;
}

TransitionKernel build_kernel(const StateSpace& space, const NetworkInstance& inst,
                              const SolveOptions& opts) {
    const int n = space.n;
    const auto pow = radix_powers(n, space.T);
    TransitionKernel kernel;
    kernel.row_start.reserve(space.count() + 1);
    kernel.row_start.push_back(0);

    RowScratch scratch;
    std::vector<std::pair<std::uint64_t, double>> codes;
    for (std::size_t s = 0; s < space.count(); ++s) {
        if ((s & 0xFF) == 0) check_deadline(opts);
        transition_codes(space.state(s), inst, opts.mode, pow, scratch, codes);
        for (const auto& [code, prob] : codes) {
            kernel.next.push_back(space.index.at(code));
            kernel.prob.push_back(prob);
        }
        kernel.row_start.push_back(kernel.next.size());
    }
    return kernel;
}

namespace {

StationaryDistribution stationary_impl(const TransitionKernel& kernel, double tol,
                                       std::uint64_t max_iters, const SolveOptions& opts) {
    const std::size_t m = kernel.rows();
    StationaryDistribution out;
    out.pi.assign(m, 1.0 / static_cast<double>(m));
    std::vector<double> next(m);

    // Plain power iteration first; if it has not converged after this many
    // sweeps the chain is likely periodic and the lazy update takes over.
    const std::uint64_t plain_phase = std::min<std::uint64_t>(max_iters, 20'000);

    for (std::uint64_t iter = 0; iter <= max_iters; ++iter) {
        if ((iter & 0x3F) == 0) check_deadline(opts);
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t s = 0; s < m; ++s) {
            const double mass = out.pi[s];
            if (mass == 0.0) continue;
            for (std::size_t k = kernel.row_start[s]; k < kernel.row_start[s + 1]; ++k) {
                next[kernel.next[k]] += mass * kernel.prob[k];
            }
        }

        double residual = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            residual = std::max(residual, std::abs(next[i] - out.pi[i]));
        }
        out.iterations = iter;
        out.residual = residual;

        // The residual belongs to the iterate we would return, so convergence
        // leaves out.pi untouched.
        if (residual <= tol) return out;

        if (iter > plain_phase) {
            // Lazy chain: pi <- 0.999 P^T pi + 0.001 pi. Same fixed point,
            // strictly subunit damping of any rotating eigencomponent.
            out.damped = true;
            for (std::size_t i = 0; i < m; ++i) {
                next[i] = 0.999 * next[i] + 0.001 * out.pi[i];
            }
        }

        double sum = 0.0;
        for (double v : next) sum += v;
        for (double& v : next) v /= sum;
        out.pi.swap(next);
    }

    std::ostringstream msg;
    msg << "stationary solve did not converge within " << max_iters
        << " iterations (residual = " << out.residual << ", tol = " << tol << ")";
    throw NumericError(msg.str());
}

} // namespace

StationaryDistribution stationary(const TransitionKernel& kernel, double tol,
                                  std::uint64_t max_iters) {
    return stationary_impl(kernel, tol, max_iters, SolveOptions{});
}

ExactResult throughput_exact(const NetworkInstance& inst, const SolveOptions& opts) {
    const StateSpace space = enumerate_states(inst, opts);
    const TransitionKernel kernel = build_kernel(space, inst, opts);
    const StationaryDistribution dist = stationary_impl(kernel, opts.tol, opts.max_iters, opts);

    const ConflictGraph& g = inst.graph;
    const int n = g.n();
    ExactResult result;
    result.state_count = space.count();
    result.residual = dist.residual;
    result.damped = dist.damped;
    result.mode = opts.mode;
    result.theta.assign(n, 0.0);

    std::vector<std::uint8_t> eligible(n);
    for (std::size_t s = 0; s < space.count(); ++s) {
        if ((s & 0x3FF) == 0) check_deadline(opts);
        const std::uint8_t* state = space.state(s);
        const double mass = dist.pi[s];
        if (mass == 0.0) continue;
        for (int i = 0; i < n; ++i) {
            bool ok = state[i] == 0;
            if (ok) {
                for (int j : g.neighbors(i)) {
                    if (state[j] != 0) { ok = false; break; }
                }
            }
            eligible[i] = ok ? 1 : 0;
        }
        for (int i = 0; i < n; ++i) {
            if (!eligible[i]) continue;
            double r = inst.p[i];
            for (int j : g.neighbors(i)) {
                if (eligible[j]) r *= 1.0 - inst.p[j];
            }
            result.theta[i] += mass * r;
        }
    }
    for (double& th : result.theta) {
        th = std::clamp(th * inst.T, 0.0, 1.0);
    }
    return result;
}

TimingProbe mc_timing_probe(const NetworkInstance& inst, double budget_seconds,
                            SolveOptions opts) {
    TimingProbe probe;
    const auto start = std::chrono::steady_clock::now();
    opts.deadline = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                std::chrono::duration<double>(budget_seconds));
    try {
        probe.result = throughput_exact(inst, opts);
    } catch (const DeadlineExceeded&) {
        probe.timed_out = true;
    }
    probe.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return probe;
}

} // namespace pcsma
