#pragma once

// Independent full-space oracle used by tests: dense kernel over all T^n
// timer vectors with its own attempt-pattern enumeration (over the idle set),
// Gaussian elimination for the stationary vector, and its own reward
// accumulation. No reachability pruning and no power iteration, so it shares
// no code path with the library solver it checks.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pcsma/graph.hpp"
#include "pcsma/markov.hpp"
#include "pcsma/sim.hpp"

namespace oracle {

inline std::vector<int> decode_full(int code, int n, int T) {
    std::vector<int> s(n);
    for (int i = 0; i < n; ++i) {
        s[i] = code % T;
        code /= T;
    }
    return s;
}

inline int encode_full(const std::vector<int>& s, int T) {
    int code = 0;
    for (int i = static_cast<int>(s.size()) - 1; i >= 0; --i) code = code * T + s[i];
    return code;
}

inline std::vector<double> dense_throughput(const pcsma::NetworkInstance& inst,
                                            pcsma::CollisionMode mode) {
    const int n = inst.graph.n();
    const int T = inst.T;
    int total = 1;
    for (int i = 0; i < n; ++i) total *= T;

    std::vector<std::vector<double>> P(total, std::vector<double>(total, 0.0));
    for (int code = 0; code < total; ++code) {
        const auto s = decode_full(code, n, T);
        std::vector<int> idle;
        for (int i = 0; i < n; ++i) {
            if (s[i] == 0) idle.push_back(i);
        }
        const int m = static_cast<int>(idle.size());
        for (int mask = 0; mask < (1 << m); ++mask) {
            double prob = 1.0;
            std::vector<int> attempting(n, 0);
            for (int a = 0; a < m && prob > 0.0; ++a) {
                const int i = idle[a];
                bool blocked = false;
                for (int j : inst.graph.neighbors(i)) {
                    if (s[j] != 0) blocked = true;
                }
                const bool attempts = (mask >> a) & 1;
                if (blocked) {
                    // A sensing node never attempts; patterns that say
                    // otherwise carry probability zero.
                    if (attempts) prob = 0.0;
                } else {
                    prob *= attempts ? inst.p[i] : 1.0 - inst.p[i];
                    attempting[i] = attempts ? 1 : 0;
                }
            }
            if (prob == 0.0) continue;
            std::vector<int> next(n);
            for (int i = 0; i < n; ++i) next[i] = std::max(s[i] - 1, 0);
            for (int i = 0; i < n; ++i) {
                if (!attempting[i]) continue;
                bool clean = true;
                for (int j : inst.graph.neighbors(i)) {
                    if (attempting[j]) clean = false;
                }
                if (clean || mode == pcsma::CollisionMode::HoldT) next[i] = T - 1;
            }
            P[code][encode_full(next, T)] += prob;
        }
    }

    // (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
    std::vector<std::vector<double>> A(total, std::vector<double>(total + 1, 0.0));
    for (int r = 0; r < total; ++r) {
        for (int c = 0; c < total; ++c) A[r][c] = P[c][r] - (r == c ? 1.0 : 0.0);
    }
    for (int c = 0; c < total; ++c) A[total - 1][c] = 1.0;
    A[total - 1][total] = 1.0;

    for (int col = 0; col < total; ++col) {
        int pivot = col;
        for (int r = col + 1; r < total; ++r) {
            if (std::abs(A[r][col]) > std::abs(A[pivot][col])) pivot = r;
        }
        std::swap(A[col], A[pivot]);
        if (std::abs(A[col][col]) <= 1e-14) {
            throw std::runtime_error("dense oracle: singular system");
        }
        for (int r = 0; r < total; ++r) {
            if (r == col) continue;
            const double f = A[r][col] / A[col][col];
            if (f == 0.0) continue;
            for (int c = col; c <= total; ++c) A[r][c] -= f * A[col][c];
        }
    }
    std::vector<double> pi(total);
    for (int r = 0; r < total; ++r) pi[r] = A[r][total] / A[r][r];

    std::vector<double> theta(n, 0.0);
    for (int code = 0; code < total; ++code) {
        const auto s = decode_full(code, n, T);
        const auto elig = pcsma::eligible_set(s, inst.graph);
        std::vector<int> is_elig(n, 0);
        for (int i : elig) is_elig[i] = 1;
        for (int i : elig) {
            double r = inst.p[i];
            for (int j : inst.graph.neighbors(i)) {
                if (is_elig[j]) r *= 1.0 - inst.p[j];
            }
            theta[i] += pi[code] * r;
        }
    }
    for (double& th : theta) th *= T;
    return theta;
}

} // namespace oracle
