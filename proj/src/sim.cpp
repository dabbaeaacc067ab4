#include "pcsma/sim.hpp"

#include <cmath>
#include <string>

#include "pcsma/errors.hpp"
#include "pcsma/rng.hpp"

namespace pcsma {

const char* to_string(CollisionMode mode) {
    return mode == CollisionMode::TimerRule ? "timer-rule" : "hold-T";
}

CollisionMode collision_mode_from_string(const std::string& s) {
    if (s == "timer-rule") return CollisionMode::TimerRule;
    if (s == "hold-T") return CollisionMode::HoldT;
    throw ValidationError("unknown collision mode '" + s + "' (timer-rule | hold-T)");
}

SimResult simulate(const NetworkInstance& inst, std::uint64_t slots, std::uint64_t seed,
                   CollisionMode mode, const SlotObserver* observer) {
    if (slots == 0) throw ValidationError("slot count must be >= 1");
    inst.require_valid();

    const ConflictGraph& g = inst.graph;
    const int n = g.n();
    const int hold = inst.T - 1;

    std::vector<int> timer(n, 0);
    std::vector<std::uint8_t> attempting(n, 0);
    std::vector<std::uint8_t> won(n, 0);
    std::vector<int> attempters;
    std::vector<int> winners;
    std::vector<std::uint64_t> successes(n, 0);
    attempters.reserve(n);
    winners.reserve(n);

    Rng rng(seed);

    for (std::uint64_t t = 0; t < slots; ++t) {
        attempters.clear();
        for (int i = 0; i < n; ++i) {
            if (timer[i] != 0) continue;
            bool blocked = false;
            for (int j : g.neighbors(i)) {
                if (timer[j] != 0) { blocked = true; break; }
            }
            // Blocked-but-idle nodes consume no RNG draw.
            if (blocked) continue;
            if (rng.bernoulli(inst.p[i])) {
                attempting[i] = 1;
                attempters.push_back(i);
            }
        }

        winners.clear();
        for (int i : attempters) {
            bool clean = true;
            for (int j : g.neighbors(i)) {
                if (attempting[j]) { clean = false; break; }
            }
            if (clean) winners.push_back(i);
        }

        if (observer) (*observer)(t, winners);

        // Winners start a packet; everyone else drains one slot. Under HoldT
        // the colliders also seize the channel, without scoring a success.
        for (int i = 0; i < n; ++i) {
            if (timer[i] > 0) --timer[i];
        }
        for (int i : winners) {
            ++successes[i];
            timer[i] = hold;
            won[i] = 1;
        }
        if (mode == CollisionMode::HoldT) {
            for (int i : attempters) {
                if (!won[i]) timer[i] = hold;
            }
        }
        for (int i : winners) won[i] = 0;
        for (int i : attempters) attempting[i] = 0;
    }

    SimResult result;
    result.success_starts = std::move(successes);
    result.slots = slots;
    result.seed = seed;
    result.theta_hat.resize(n);
    for (int i = 0; i < n; ++i) {
        result.theta_hat[i] = static_cast<double>(result.success_starts[i]) * inst.T /
                              static_cast<double>(slots);
    }
    return result;
}

double standard_error(double theta_hat, int T, std::uint64_t slots) {
    return std::sqrt(theta_hat * static_cast<double>(T) / static_cast<double>(slots));
}

double ci_half_width(double theta_hat, int T, std::uint64_t slots) {
    return 1.96 * standard_error(theta_hat, T, slots);
}

} // namespace pcsma
