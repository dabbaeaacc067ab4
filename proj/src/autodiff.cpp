#include "pcsma/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pcsma/errors.hpp"

namespace pcsma::ad {

namespace {

std::string shape_str(Tape::Shape s) {
    return std::to_string(s.rows) + "x" + std::to_string(s.cols);
}

[[noreturn]] void shape_error(const char* op, Tape::Shape a, Tape::Shape b) {
    throw ValidationError(std::string(op) + ": incompatible shapes " + shape_str(a) +
                          " and " + shape_str(b));
}

} // namespace

std::size_t Tape::count(NodeId id) const {
    const Shape s = nodes_[id].shape;
    return static_cast<std::size_t>(s.rows) * s.cols;
}

NodeId Tape::push(Op op, Shape shape, NodeId a, NodeId b) {
    Node node;
    node.op = op;
    node.shape = shape;
    node.a = a;
    node.b = b;
    node.offset = values_.size();
    values_.resize(values_.size() + static_cast<std::size_t>(shape.rows) * shape.cols, 0.0);
    nodes_.push_back(node);
    grads_valid_ = false;
    return static_cast<NodeId>(nodes_.size() - 1);
}

void Tape::require_finite(NodeId id) const {
    const double* v = data(id);
    const std::size_t m = count(id);
    for (std::size_t i = 0; i < m; ++i) {
        if (!std::isfinite(v[i])) {
            throw NumericError("non-finite value produced by tape node " + std::to_string(id));
        }
    }
}

NodeId Tape::leaf(int rows, int cols, std::span<const double> values) {
    if (rows < 1 || cols < 1 || values.size() != static_cast<std::size_t>(rows) * cols) {
        throw ValidationError("leaf: " + std::to_string(values.size()) + " values for shape " +
                              std::to_string(rows) + "x" + std::to_string(cols));
    }
    const NodeId id = push(Op::Leaf, {rows, cols}, -1, -1);
    std::copy(values.begin(), values.end(), data(id));
    require_finite(id);
    return id;
}

NodeId Tape::matmul(NodeId a, NodeId b) {
    const Shape sa = shape(a), sb = shape(b);
    if (sa.cols != sb.rows) shape_error("matmul", sa, sb);
    const NodeId id = push(Op::MatMul, {sa.rows, sb.cols}, a, b);
    const double* A = data(a);
    const double* B = data(b);
    double* C = data(id);
    const int n = sa.rows, k = sa.cols, m = sb.cols;
    for (int i = 0; i < n; ++i) {
        double* crow = C + static_cast<std::size_t>(i) * m;
        const double* arow = A + static_cast<std::size_t>(i) * k;
        for (int t = 0; t < k; ++t) {
            const double aval = arow[t];
            if (aval == 0.0) continue;
            const double* brow = B + static_cast<std::size_t>(t) * m;
            for (int j = 0; j < m; ++j) crow[j] += aval * brow[j];
        }
    }
    require_finite(id);
    return id;
}

NodeId Tape::add(NodeId a, NodeId b) {
    const Shape sa = shape(a), sb = shape(b);
    const bool row_broadcast = sb.rows == 1 && sa.cols == sb.cols && sa.rows != 1;
    if (!row_broadcast && (sa.rows != sb.rows || sa.cols != sb.cols)) {
        shape_error("add", sa, sb);
    }
    const NodeId id = push(row_broadcast ? Op::AddRow : Op::Add, sa, a, b);
    const double* A = data(a);
    const double* B = data(b);
    double* C = data(id);
    const std::size_t m = count(id);
    if (row_broadcast) {
        for (std::size_t i = 0; i < m; ++i) C[i] = A[i] + B[i % sa.cols];
    } else {
        for (std::size_t i = 0; i < m; ++i) C[i] = A[i] + B[i];
    }
    require_finite(id);
    return id;
}

NodeId Tape::relu(NodeId a) {
    const NodeId id = push(Op::Relu, shape(a), a, -1);
    const double* A = data(a);
    double* C = data(id);
    const std::size_t m = count(id);
    for (std::size_t i = 0; i < m; ++i) C[i] = A[i] > 0.0 ? A[i] : 0.0;
    return id;
}

NodeId Tape::sigmoid(NodeId a) {
    const NodeId id = push(Op::Sigmoid, shape(a), a, -1);
    const double* A = data(a);
    double* C = data(id);
    const std::size_t m = count(id);
    for (std::size_t i = 0; i < m; ++i) {
        // Keep the exp() argument nonpositive so large |x| cannot overflow.
        const double x = A[i];
        if (x >= 0.0) {
            C[i] = 1.0 / (1.0 + std::exp(-x));
        } else {
            const double e = std::exp(x);
            C[i] = e / (1.0 + e);
        }
    }
    require_finite(id);
    return id;
}

NodeId Tape::log_eps(NodeId a, double eps) {
    const NodeId id = push(Op::LogEps, shape(a), a, -1);
    nodes_.back().c = eps;
    const double* A = data(a);
    double* C = data(id);
    const std::size_t m = count(id);
    for (std::size_t i = 0; i < m; ++i) C[i] = std::log(A[i] + eps);
    require_finite(id);
    return id;
}

NodeId Tape::scalar_mul(NodeId a, double c) {
    const NodeId id = push(Op::ScalarMulC, shape(a), a, -1);
    nodes_.back().c = c;
    const double* A = data(a);
    double* C = data(id);
    const std::size_t m = count(id);
    for (std::size_t i = 0; i < m; ++i) C[i] = c * A[i];
    require_finite(id);
    return id;
}

NodeId Tape::scalar_mul(NodeId scalar, NodeId a) {
    const Shape ss = shape(scalar);
    if (ss.rows != 1 || ss.cols != 1) shape_error("scalar_mul", ss, shape(a));
    const NodeId id = push(Op::ScalarMulP, shape(a), scalar, a);
    const double s = scalar_value(scalar);
    const double* A = data(a);
    double* C = data(id);
    const std::size_t m = count(id);
    for (std::size_t i = 0; i < m; ++i) C[i] = s * A[i];
    require_finite(id);
    return id;
}

NodeId Tape::mul(NodeId a, NodeId b) {
    const Shape sa = shape(a), sb = shape(b);
    if (sa.rows != sb.rows || sa.cols != sb.cols) shape_error("mul", sa, sb);
    const NodeId id = push(Op::Mul, sa, a, b);
    const double* A = data(a);
    const double* B = data(b);
    double* C = data(id);
    const std::size_t m = count(id);
    for (std::size_t i = 0; i < m; ++i) C[i] = A[i] * B[i];
    require_finite(id);
    return id;
}

NodeId Tape::sum(NodeId a) {
    const NodeId id = push(Op::Sum, {1, 1}, a, -1);
    const double* A = data(a);
    double total = 0.0;
    const std::size_t m = count(a);
    for (std::size_t i = 0; i < m; ++i) total += A[i];
    *data(id) = total;
    require_finite(id);
    return id;
}

NodeId Tape::mean(NodeId a) {
    const NodeId id = push(Op::Mean, {1, 1}, a, -1);
    const double* A = data(a);
    double total = 0.0;
    const std::size_t m = count(a);
    for (std::size_t i = 0; i < m; ++i) total += A[i];
    *data(id) = total / static_cast<double>(m);
    require_finite(id);
    return id;
}

NodeId Tape::mse(NodeId pred, NodeId target) {
    const Shape sp = shape(pred), st = shape(target);
    if (sp.rows != st.rows || sp.cols != st.cols) shape_error("mse", sp, st);
    const NodeId id = push(Op::Mse, {1, 1}, pred, target);
    const double* P = data(pred);
    const double* Y = data(target);
    double total = 0.0;
    const std::size_t m = count(pred);
    for (std::size_t i = 0; i < m; ++i) {
        const double d = P[i] - Y[i];
        total += d * d;
    }
    *data(id) = total / static_cast<double>(m);
    require_finite(id);
    return id;
}

NodeId Tape::scatter_add_edges(NodeId z, const std::vector<std::pair<int, int>>& edges) {
    const Shape sz = shape(z);
    const NodeId id = push(Op::ScatterAdd, sz, z, -1);
    edge_lists_.push_back(edges);
    nodes_.back().aux = static_cast<int>(edge_lists_.size() - 1);
    const double* Z = data(z);
    double* C = data(id);
    for (const auto& [u, v] : edges) {
        if (u < 0 || v < 0 || u >= sz.rows || v >= sz.rows) {
            throw ValidationError("scatter_add_edges: edge (" + std::to_string(u) + "," +
                                  std::to_string(v) + ") outside " + shape_str(sz));
        }
        const double* src = Z + static_cast<std::size_t>(u) * sz.cols;
        double* dst = C + static_cast<std::size_t>(v) * sz.cols;
        for (int j = 0; j < sz.cols; ++j) dst[j] += src[j];
    }
    require_finite(id);
    return id;
}

NodeId Tape::weighted_scatter_add(NodeId z, NodeId w,
                                  const std::vector<std::pair<int, int>>& edges) {
    const Shape sz = shape(z), sw = shape(w);
    if (sw.cols != 1 || sw.rows != static_cast<int>(edges.size())) {
        shape_error("weighted_scatter_add", sz, sw);
    }
    const NodeId id = push(Op::WeightedScatterAdd, sz, z, w);
    edge_lists_.push_back(edges);
    nodes_.back().aux = static_cast<int>(edge_lists_.size() - 1);
    const double* Z = data(z);
    const double* W = data(w);
    double* C = data(id);
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto [u, v] = edges[e];
        if (u < 0 || v < 0 || u >= sz.rows || v >= sz.rows) {
            throw ValidationError("weighted_scatter_add: edge (" + std::to_string(u) + "," +
                                  std::to_string(v) + ") outside " + shape_str(sz));
        }
        const double weight = W[e];
        const double* src = Z + static_cast<std::size_t>(u) * sz.cols;
        double* dst = C + static_cast<std::size_t>(v) * sz.cols;
        for (int j = 0; j < sz.cols; ++j) dst[j] += weight * src[j];
    }
    require_finite(id);
    return id;
}

NodeId Tape::gather_rows(NodeId a, const std::vector<int>& index) {
    const Shape sa = shape(a);
    const NodeId id = push(Op::GatherRows, {static_cast<int>(index.size()), sa.cols}, a, -1);
    index_lists_.push_back(index);
    nodes_.back().aux = static_cast<int>(index_lists_.size() - 1);
    const double* A = data(a);
    double* C = data(id);
    for (std::size_t k = 0; k < index.size(); ++k) {
        const int r = index[k];
        if (r < 0 || r >= sa.rows) {
            throw ValidationError("gather_rows: index " + std::to_string(r) + " outside " +
                                  shape_str(sa));
        }
        std::copy_n(A + static_cast<std::size_t>(r) * sa.cols, sa.cols,
                    C + k * static_cast<std::size_t>(sa.cols));
    }
    return id;
}

std::span<const double> Tape::value(NodeId id) const {
    return {data(id), count(id)};
}

std::span<const double> Tape::grad(NodeId id) const {
    if (!grads_valid_) throw ValidationError("grad() called before backward()");
    return {grads_.data() + nodes_[id].offset, count(id)};
}

void Tape::backward(NodeId loss) {
    const Shape s = shape(loss);
    if (s.rows != 1 || s.cols != 1) {
        throw ValidationError("backward: loss must be 1x1, got " + shape_str(s));
    }
    grads_.assign(values_.size(), 0.0);
    grads_[nodes_[loss].offset] = 1.0;
    for (NodeId id = loss; id >= 0; --id) backward_node(nodes_[id]);
    grads_valid_ = true;
}

void Tape::backward_node(const Node& node) {
    const double* g = grads_.data() + node.offset;
    const std::size_t m = static_cast<std::size_t>(node.shape.rows) * node.shape.cols;

    switch (node.op) {
        case Op::Leaf:
            break;
        case Op::MatMul: {
            const Shape sa = nodes_[node.a].shape, sb = nodes_[node.b].shape;
            const double* A = data(node.a);
            const double* B = data(node.b);
            double* ga = gdata(node.a);
            double* gb = gdata(node.b);
            const int n = sa.rows, k = sa.cols, c = sb.cols;
            // dA += g . B^T
            for (int i = 0; i < n; ++i) {
                const double* grow = g + static_cast<std::size_t>(i) * c;
                double* garow = ga + static_cast<std::size_t>(i) * k;
                for (int t = 0; t < k; ++t) {
                    double acc = 0.0;
                    const double* brow = B + static_cast<std::size_t>(t) * c;
                    for (int j = 0; j < c; ++j) acc += grow[j] * brow[j];
                    garow[t] += acc;
                }
            }
            // dB += A^T . g
            for (int i = 0; i < n; ++i) {
                const double* arow = A + static_cast<std::size_t>(i) * k;
                const double* grow = g + static_cast<std::size_t>(i) * c;
                for (int t = 0; t < k; ++t) {
                    const double aval = arow[t];
                    if (aval == 0.0) continue;
                    double* gbrow = gb + static_cast<std::size_t>(t) * c;
                    for (int j = 0; j < c; ++j) gbrow[j] += aval * grow[j];
                }
            }
            break;
        }
        case Op::Add: {
            double* ga = gdata(node.a);
            double* gb = gdata(node.b);
            for (std::size_t i = 0; i < m; ++i) {
                ga[i] += g[i];
                gb[i] += g[i];
            }
            break;
        }
        case Op::AddRow: {
            double* ga = gdata(node.a);
            double* gb = gdata(node.b);
            const int cols = node.shape.cols;
            for (std::size_t i = 0; i < m; ++i) {
                ga[i] += g[i];
                gb[i % cols] += g[i];
            }
            break;
        }
        case Op::Relu: {
            const double* A = data(node.a);
            double* ga = gdata(node.a);
            for (std::size_t i = 0; i < m; ++i) {
                if (A[i] > 0.0) ga[i] += g[i];
            }
            break;
        }
        case Op::Sigmoid: {
            const double* y = values_.data() + node.offset;
            double* ga = gdata(node.a);
            for (std::size_t i = 0; i < m; ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
            break;
        }
        case Op::LogEps: {
            const double* A = data(node.a);
            double* ga = gdata(node.a);
            for (std::size_t i = 0; i < m; ++i) ga[i] += g[i] / (A[i] + node.c);
            break;
        }
        case Op::ScalarMulC: {
            double* ga = gdata(node.a);
            for (std::size_t i = 0; i < m; ++i) ga[i] += node.c * g[i];
            break;
        }
        case Op::ScalarMulP: {
            const double s = *data(node.a);
            const double* A = data(node.b);
            double* gs = gdata(node.a);
            double* ga = gdata(node.b);
            double acc = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                acc += g[i] * A[i];
                ga[i] += s * g[i];
            }
            *gs += acc;
            break;
        }
        case Op::Mul: {
            const double* A = data(node.a);
            const double* B = data(node.b);
            double* ga = gdata(node.a);
            double* gb = gdata(node.b);
            for (std::size_t i = 0; i < m; ++i) {
                ga[i] += g[i] * B[i];
                gb[i] += g[i] * A[i];
            }
            break;
        }
        case Op::Sum: {
            const double go = g[0];
            double* ga = gdata(node.a);
            const std::size_t ma = count(node.a);
            for (std::size_t i = 0; i < ma; ++i) ga[i] += go;
            break;
        }
        case Op::Mean: {
            const std::size_t ma = count(node.a);
            const double go = g[0] / static_cast<double>(ma);
            double* ga = gdata(node.a);
            for (std::size_t i = 0; i < ma; ++i) ga[i] += go;
            break;
        }
        case Op::Mse: {
            const std::size_t ma = count(node.a);
            const double scale = 2.0 * g[0] / static_cast<double>(ma);
            const double* P = data(node.a);
            const double* Y = data(node.b);
            double* gp = gdata(node.a);
            double* gy = gdata(node.b);
            for (std::size_t i = 0; i < ma; ++i) {
                const double d = scale * (P[i] - Y[i]);
                gp[i] += d;
                gy[i] -= d;
            }
            break;
        }
        case Op::ScatterAdd: {
            const int cols = node.shape.cols;
            double* gz = gdata(node.a);
            for (const auto& [u, v] : edge_lists_[node.aux]) {
                const double* gdst = g + static_cast<std::size_t>(v) * cols;
                double* gsrc = gz + static_cast<std::size_t>(u) * cols;
                for (int j = 0; j < cols; ++j) gsrc[j] += gdst[j];
            }
            break;
        }
        case Op::WeightedScatterAdd: {
            const int cols = node.shape.cols;
            const double* Z = data(node.a);
            const double* W = data(node.b);
            double* gz = gdata(node.a);
            double* gw = gdata(node.b);
            const auto& edges = edge_lists_[node.aux];
            for (std::size_t e = 0; e < edges.size(); ++e) {
                const auto [u, v] = edges[e];
                const double* gdst = g + static_cast<std::size_t>(v) * cols;
                const double* src = Z + static_cast<std::size_t>(u) * cols;
                double* gsrc = gz + static_cast<std::size_t>(u) * cols;
                double acc = 0.0;
                for (int j = 0; j < cols; ++j) {
                    gsrc[j] += W[e] * gdst[j];
                    acc += gdst[j] * src[j];
                }
                gw[e] += acc;
            }
            break;
        }
        case Op::GatherRows: {
            const int cols = node.shape.cols;
            double* ga = gdata(node.a);
            const auto& index = index_lists_[node.aux];
            for (std::size_t k = 0; k < index.size(); ++k) {
                const double* grow = g + k * static_cast<std::size_t>(cols);
                double* garow = ga + static_cast<std::size_t>(index[k]) * cols;
                for (int j = 0; j < cols; ++j) garow[j] += grow[j];
            }
            break;
        }
    }
}

void Tape::reset() {
    nodes_.clear();
    values_.clear();
    grads_.clear();
    edge_lists_.clear();
    index_lists_.clear();
    grads_valid_ = false;
}

GradCheckResult grad_check(const std::function<double(const std::vector<double>&)>& f,
                           std::vector<double> theta,
                           const std::vector<double>& analytic_grad,
                           double h) {
    if (theta.size() != analytic_grad.size()) {
        throw ValidationError("grad_check: gradient length mismatch");
    }
    if (!(h > 0.0)) throw ValidationError("grad_check: h must be > 0");

    GradCheckResult result;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double saved = theta[i];
        theta[i] = saved + h;
        const double up = f(theta);
        theta[i] = saved - h;
        const double down = f(theta);
        theta[i] = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double denom = std::max({1.0, std::abs(numeric), std::abs(analytic_grad[i])});
        const double rel = std::abs(numeric - analytic_grad[i]) / denom;
        if (rel > result.max_rel_err) {
            result.max_rel_err = rel;
            result.worst_coordinate = i;
        }
    }
    return result;
}

} // namespace pcsma::ad
