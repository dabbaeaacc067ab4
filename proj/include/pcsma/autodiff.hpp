#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace pcsma::ad {

// Node handle on a Tape. Plain index; -1 means "no input".
using NodeId = int;

// Dynamic reverse-mode tape over dense row-major f64 matrices. Every forward
// op appends a node and its output; backward() walks the record once in
// reverse. The tape owns all value/grad storage in two arenas so a reset()
// between samples reuses capacity instead of reallocating. Edge and index
// lists are copied in, so callers owe the tape no lifetimes.
class Tape {
public:
    struct Shape {
        int rows = 0;
        int cols = 0;
    };

    // Leaves: inputs, parameters, and constants all enter the same way;
    // gradients are accumulated for every node and simply ignored where the
    // caller does not care.
    NodeId leaf(int rows, int cols, std::span<const double> values);
    NodeId leaf_scalar(double value) { return leaf(1, 1, {&value, 1}); }

    NodeId matmul(NodeId a, NodeId b);
    // Same-shape addition, or row-broadcast when b is 1 x cols.
    NodeId add(NodeId a, NodeId b);
    NodeId relu(NodeId a);
    NodeId sigmoid(NodeId a);
    // ln(a + eps), the utility-objective guard.
    NodeId log_eps(NodeId a, double eps);
    // Multiply by a compile-time constant...
    NodeId scalar_mul(NodeId a, double c);
    // ...or by a learnable 1x1 tensor (GIN's (1+eps) self-weight).
    NodeId scalar_mul(NodeId scalar, NodeId a);
    NodeId mul(NodeId a, NodeId b);  // elementwise
    NodeId sum(NodeId a);
    NodeId mean(NodeId a);
    NodeId mse(NodeId pred, NodeId target);
    // out[v] += z[u] over directed edges (u, v).
    NodeId scatter_add_edges(NodeId z, const std::vector<std::pair<int, int>>& edges);
    // out[v] += w[e] * z[u]; w holds one scalar per directed edge.
    NodeId weighted_scatter_add(NodeId z, NodeId w,
                                const std::vector<std::pair<int, int>>& edges);
    // out[k] = a[index[k]], one gathered row per entry.
    NodeId gather_rows(NodeId a, const std::vector<int>& index);

    Shape shape(NodeId id) const { return nodes_[id].shape; }
    std::span<const double> value(NodeId id) const;
    double scalar_value(NodeId id) const { return value(id)[0]; }

    // Reverse sweep from a 1x1 loss node; fills grads for every node.
    void backward(NodeId loss);
    std::span<const double> grad(NodeId id) const;

    // Forget all nodes but keep arena capacity.
    void reset();

    std::size_t size() const { return nodes_.size(); }

private:
    enum class Op {
        Leaf, MatMul, Add, AddRow, Relu, Sigmoid, LogEps, ScalarMulC, ScalarMulP,
        Mul, Sum, Mean, Mse, ScatterAdd, WeightedScatterAdd, GatherRows
    };

    struct Node {
        Op op;
        Shape shape;
        NodeId a = -1;
        NodeId b = -1;
        std::size_t offset = 0;  // into both arenas
        double c = 0.0;
        int aux = -1;  // position in edge_lists_ / index_lists_
    };

    NodeId push(Op op, Shape shape, NodeId a, NodeId b);
    double* data(NodeId id) { return values_.data() + nodes_[id].offset; }
    const double* data(NodeId id) const { return values_.data() + nodes_[id].offset; }
    double* gdata(NodeId id) { return grads_.data() + nodes_[id].offset; }
    std::size_t count(NodeId id) const;
    void require_finite(NodeId id) const;
    void backward_node(const Node& node);

    std::vector<Node> nodes_;
    std::vector<double> values_;
    std::vector<double> grads_;
    std::deque<std::vector<std::pair<int, int>>> edge_lists_;
    std::deque<std::vector<int>> index_lists_;
    bool grads_valid_ = false;
};

struct GradCheckResult {
    double max_rel_err = 0.0;
    std::size_t worst_coordinate = 0;
};

// Central finite differences of `f` against an analytic gradient, coordinate
// by coordinate. Relative error uses the guarded denominator
// max(1, |analytic|, |numeric|) so noise on near-zero coordinates does not
// mask or fake a defect.
GradCheckResult grad_check(const std::function<double(const std::vector<double>&)>& f,
                           std::vector<double> theta,
                           const std::vector<double>& analytic_grad,
                           double h = 1e-6);

} // namespace pcsma::ad
