#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace pcsma {

// Undirected interference topology. Vertices are transmitters, an edge means
// the two endpoints cannot transmit simultaneously. Immutable after
// construction; derived structures (adjacency, neighbor lists, directed edge
// list) are built once so solvers can share one instance across threads.
class ConflictGraph {
public:
    // Edges are unordered pairs; duplicates and self-loops are rejected.
    ConflictGraph(int n, std::vector<std::pair<int, int>> edges);

    int n() const { return n_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const std::vector<int>& neighbors(int i) const;
    bool adjacent(int i, int j) const { return adj_[static_cast<std::size_t>(i) * n_ + j] != 0; }
    int degree(int i) const { return static_cast<int>(neighbors_[i].size()); }

    // Both directions of every undirected edge, ordered (u->v) by (v, u).
    // Scatter-style aggregations sum rows over these directed pairs.
    const std::vector<std::pair<int, int>>& directed_edges() const { return directed_; }

    // Row-major n^2 string of '0'/'1' characters (dataset CSV form).
    std::string adjacency_string() const;
    static ConflictGraph from_adjacency_string(const std::string& s);

    // Relabel: node i of the result is node perm[i] of this graph.
    ConflictGraph permuted(const std::vector<int>& perm) const;

private:
    int n_;
    std::vector<std::pair<int, int>> edges_;     // canonical: i < j, sorted
    std::vector<std::uint8_t> adj_;              // n x n symmetric, zero diagonal
    std::vector<std::vector<int>> neighbors_;    // sorted ascending
    std::vector<std::pair<int, int>> directed_;
};

// G(n, p_edge): each unordered pair is included independently. Identical
// (n, p_edge, seed) yields a bit-identical graph on every platform.
ConflictGraph erdos_renyi(int n, double p_edge, std::uint64_t seed);

// A conflict graph plus the per-node attempt probabilities and packet
// duration: the input to every solver in this toolkit.
struct NetworkInstance {
    ConflictGraph graph;
    std::vector<double> p;  // attempt probabilities, one per node, each in [0,1]
    int T = 1;              // packet duration in slots
    int sigma = 1;          // idle wait after deferral; fixed to 1

    std::vector<std::string> validate() const;

    // Throws ValidationError listing every violation.
    void require_valid() const;
};

} // namespace pcsma
