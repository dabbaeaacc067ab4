#include "pcsma/graph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pcsma/errors.hpp"
#include "pcsma/rng.hpp"

namespace pcsma {

ConflictGraph::ConflictGraph(int n, std::vector<std::pair<int, int>> edges) : n_(n) {
    if (n < 1) {
        throw ValidationError("node count must be >= 1, got " + std::to_string(n));
    }
    edges_.reserve(edges.size());
    for (auto [a, b] : edges) {
        if (a == b) {
            throw ValidationError("self-loop on node " + std::to_string(a));
        }
        if (a < 0 || b < 0 || a >= n || b >= n) {
            throw ValidationError("edge (" + std::to_string(a) + "," + std::to_string(b) +
                                  ") out of range for n=" + std::to_string(n));
        }
        if (a > b) std::swap(a, b);
        edges_.emplace_back(a, b);
    }
    std::sort(edges_.begin(), edges_.end());
    const auto dup = std::adjacent_find(edges_.begin(), edges_.end());
    if (dup != edges_.end()) {
        throw ValidationError("duplicate edge (" + std::to_string(dup->first) + "," +
                              std::to_string(dup->second) + ")");
    }

    adj_.assign(static_cast<std::size_t>(n_) * n_, 0);
    neighbors_.assign(n_, {});
    for (auto [a, b] : edges_) {
        adj_[static_cast<std::size_t>(a) * n_ + b] = 1;
        adj_[static_cast<std::size_t>(b) * n_ + a] = 1;
        neighbors_[a].push_back(b);
        neighbors_[b].push_back(a);
    }
    for (auto& nb : neighbors_) std::sort(nb.begin(), nb.end());

    directed_.reserve(2 * edges_.size());
    for (int v = 0; v < n_; ++v) {
        for (int u : neighbors_[v]) directed_.emplace_back(u, v);
    }
}

const std::vector<int>& ConflictGraph::neighbors(int i) const {
    if (i < 0 || i >= n_) {
        throw ValidationError("node id " + std::to_string(i) + " out of range for n=" +
                              std::to_string(n_));
    }
    return neighbors_[i];
}

std::string ConflictGraph::adjacency_string() const {
    std::string s(adj_.size(), '0');
    for (std::size_t k = 0; k < adj_.size(); ++k) {
        if (adj_[k]) s[k] = '1';
    }
    return s;
}

ConflictGraph ConflictGraph::from_adjacency_string(const std::string& s) {
    const auto len = s.size();
    const int n = static_cast<int>(std::llround(std::sqrt(static_cast<double>(len))));
    if (n < 1 || static_cast<std::size_t>(n) * n != len) {
        throw ValidationError("adjacency string length " + std::to_string(len) +
                              " is not a perfect square");
    }
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const char c = s[static_cast<std::size_t>(i) * n + j];
            if (c != '0' && c != '1') {
                throw ValidationError("adjacency string contains '" + std::string(1, c) +
                                      "' (only '0'/'1' allowed)");
            }
            const char mirror = s[static_cast<std::size_t>(j) * n + i];
            if (c != mirror) {
                throw ValidationError("adjacency string asymmetric at (" + std::to_string(i) +
                                      "," + std::to_string(j) + ")");
            }
            if (i == j && c != '0') {
                throw ValidationError("adjacency string has self-loop at node " +
                                      std::to_string(i));
            }
            if (c == '1' && i < j) edges.emplace_back(i, j);
        }
    }
    return ConflictGraph(n, std::move(edges));
}

ConflictGraph ConflictGraph::permuted(const std::vector<int>& perm) const {
    if (static_cast<int>(perm.size()) != n_) {
        throw ValidationError("permutation length mismatch");
    }
    std::vector<std::pair<int, int>> edges;
    edges.reserve(edges_.size());
    for (auto [a, b] : edges_) edges.emplace_back(perm[a], perm[b]);
    return ConflictGraph(n_, std::move(edges));
}

ConflictGraph erdos_renyi(int n, double p_edge, std::uint64_t seed) {
    if (!(p_edge >= 0.0 && p_edge <= 1.0)) {
        throw ValidationError("p_edge must be in [0,1], got " + std::to_string(p_edge));
    }
    Rng rng(seed);
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (rng.bernoulli(p_edge)) edges.emplace_back(i, j);
        }
    }
    return ConflictGraph(n, std::move(edges));
}

std::vector<std::string> NetworkInstance::validate() const {
    std::vector<std::string> violations;
    if (static_cast<int>(p.size()) != graph.n()) {
        violations.push_back("p length " + std::to_string(p.size()) + " != node count " +
                             std::to_string(graph.n()));
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(p[i] >= 0.0 && p[i] <= 1.0)) {
            violations.push_back("p[" + std::to_string(i) + "] out of [0,1]");
        }
    }
    if (T < 1) violations.push_back("T must be >= 1");
    if (sigma != 1) violations.push_back("sigma must be 1");
    return violations;
}

void NetworkInstance::require_valid() const {
    const auto violations = validate();
    if (violations.empty()) return;
    std::ostringstream msg;
    msg << "invalid network instance:";
    for (const auto& v : violations) msg << " " << v << ";";
    throw ValidationError(msg.str());
}

} // namespace pcsma
