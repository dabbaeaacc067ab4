#include "pcsma/gnn.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "pcsma/errors.hpp"
#include "pcsma/rng.hpp"

namespace pcsma {

const char* to_string(LayerKind kind) {
    switch (kind) {
        case LayerKind::Gcn: return "gcn";
        case LayerKind::Sage: return "sage";
        case LayerKind::Gin: return "gin";
        case LayerKind::Gine: return "gine";
        case LayerKind::Dgcn: return "dgcn";
    }
    return "?";
}

LayerKind layer_kind_from_string(const std::string& s) {
    if (s == "gcn") return LayerKind::Gcn;
    if (s == "sage") return LayerKind::Sage;
    if (s == "gin") return LayerKind::Gin;
    if (s == "gine") return LayerKind::Gine;
    if (s == "dgcn") return LayerKind::Dgcn;
    throw ValidationError("unknown architecture '" + s + "' (gcn|sage|gin|gine|dgcn)");
}

const char* to_string(FeatureMode mode) {
    return mode == FeatureMode::POnly ? "p" : "pT";
}

FeatureMode feature_mode_from_string(const std::string& s) {
    if (s == "p") return FeatureMode::POnly;
    if (s == "pT") return FeatureMode::PAndT;
    throw ValidationError("unknown feature mode '" + s + "' (p | pT)");
}

void ModelConfig::require_valid() const {
    if (num_layers < 1) throw ValidationError("num_layers must be >= 1");
    if (hidden_dim < 1) throw ValidationError("hidden_dim must be >= 1");
    if (head_dims.size() != 3 || head_dims[0] != hidden_dim || head_dims[2] != 1) {
        throw ValidationError("head_dims must be [hidden_dim, k, 1]");
    }
    if (head_dims[1] < 1) throw ValidationError("head hidden width must be >= 1");
}

ParamLayout ParamLayout::for_config(const ModelConfig& config) {
    config.require_valid();
    ParamLayout layout;
    auto push = [&layout](const std::string& name, int rows, int cols) {
        layout.items.push_back({name, rows, cols, layout.total});
        layout.total += static_cast<std::size_t>(rows) * cols;
    };

    const int h = config.hidden_dim;
    for (int l = 0; l < config.num_layers; ++l) {
        const int d_in = l == 0 ? config.input_dim() : h;
        const std::string prefix = "layer" + std::to_string(l) + ".";
        switch (config.layer_kind) {
            case LayerKind::Gcn:
                push(prefix + "w", d_in, h);
                break;
            case LayerKind::Sage:
                push(prefix + "w_self", d_in, h);
                push(prefix + "w_nbr", d_in, h);
                break;
            case LayerKind::Gine:
                push(prefix + "edge_w", 1, d_in);
                push(prefix + "edge_b", 1, d_in);
                [[fallthrough]];
            case LayerKind::Gin:
                push(prefix + "eps", 1, 1);
                push(prefix + "mlp_w1", d_in, h);
                push(prefix + "mlp_b1", 1, h);
                push(prefix + "mlp_w2", h, h);
                push(prefix + "mlp_b2", 1, h);
                break;
            case LayerKind::Dgcn:
                push(prefix + "w_self", d_in, h);
                push(prefix + "w_nbr", d_in, h);
                push(prefix + "attn", h, 1);
                push(prefix + "bias", 1, h);
                break;
        }
    }
    push("head.w1", h, config.head_dims[1]);
    push("head.b1", 1, config.head_dims[1]);
    push("head.w2", config.head_dims[1], 1);
    push("head.b2", 1, 1);
    return layout;
}

namespace {

bool is_weight_matrix(const std::string& name) {
    // Everything except biases, attention vectors, and GIN epsilons gets a
    // Glorot draw; those three start at zero.
    const auto tail = name.substr(name.find('.') + 1);
    return tail == "w" || tail == "w_self" || tail == "w_nbr" || tail == "w1" ||
           tail == "w2" || tail == "mlp_w1" || tail == "mlp_w2" || tail == "edge_w";
}

} // namespace

ModelParameters init_parameters(const ModelConfig& config) {
    ModelParameters params;
    params.config = config;
    params.layout = ParamLayout::for_config(config);
    params.flat.assign(params.layout.total, 0.0);

    Rng root(config.seed);
    for (std::size_t t = 0; t < params.layout.items.size(); ++t) {
        const auto& item = params.layout.items[t];
        if (!is_weight_matrix(item.name)) continue;
        Rng stream = root.child(t);
        const double bound = std::sqrt(6.0 / (item.rows + item.cols));
        double* dst = params.flat.data() + item.offset;
        const std::size_t m = static_cast<std::size_t>(item.rows) * item.cols;
        for (std::size_t i = 0; i < m; ++i) {
            dst[i] = bound * (2.0 * stream.next_double() - 1.0);
        }
    }
    return params;
}

std::vector<double> node_features(const NetworkInstance& inst, FeatureMode mode) {
    if (inst.p.empty()) throw ValidationError("node_features: empty p vector");
    inst.require_valid();
    const int n = inst.graph.n();
    if (mode == FeatureMode::POnly) {
        return inst.p;
    }
    std::vector<double> features(static_cast<std::size_t>(n) * 2);
    for (int i = 0; i < n; ++i) {
        features[2 * i] = inst.p[i];
        features[2 * i + 1] = static_cast<double>(inst.T);
    }
    return features;
}

namespace {

// Symmetrically normalized adjacency with self-loops for GCN.
std::vector<double> gcn_propagation_matrix(const ConflictGraph& g) {
    const int n = g.n();
    std::vector<double> inv_sqrt_deg(n);
    for (int i = 0; i < n; ++i) {
        inv_sqrt_deg[i] = 1.0 / std::sqrt(static_cast<double>(g.degree(i) + 1));
    }
    std::vector<double> s(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        s[static_cast<std::size_t>(i) * n + i] = inv_sqrt_deg[i] * inv_sqrt_deg[i];
        for (int j : g.neighbors(i)) {
            s[static_cast<std::size_t>(i) * n + j] = inv_sqrt_deg[i] * inv_sqrt_deg[j];
        }
    }
    return s;
}

// Row-normalized adjacency (zero rows for isolated nodes) for GraphSAGE.
std::vector<double> mean_aggregation_matrix(const ConflictGraph& g) {
    const int n = g.n();
    std::vector<double> m(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        const int deg = g.degree(i);
        if (deg == 0) continue;
        const double w = 1.0 / deg;
        for (int j : g.neighbors(i)) m[static_cast<std::size_t>(i) * n + j] = w;
    }
    return m;
}

std::vector<int> edge_sources(const ConflictGraph& g) {
    std::vector<int> src;
    src.reserve(g.directed_edges().size());
    for (const auto& [u, v] : g.directed_edges()) {
        (void)v;
        src.push_back(u);
    }
    return src;
}

} // namespace

ad::NodeId dgcn_layer(ad::Tape& tape, ad::NodeId h, const ConflictGraph& g,
                      ad::NodeId w_self, ad::NodeId w_nbr, ad::NodeId attn, ad::NodeId bias) {
    const auto& edges = g.directed_edges();
    ad::NodeId pre = tape.matmul(h, w_self);
    if (!edges.empty()) {
        const ad::NodeId z = tape.matmul(h, w_nbr);
        const ad::NodeId alpha = tape.sigmoid(tape.matmul(z, attn));  // per-node score
        const ad::NodeId edge_alpha = tape.gather_rows(alpha, edge_sources(g));
        pre = tape.add(pre, tape.weighted_scatter_add(tape.relu(z), edge_alpha, edges));
    }
    return tape.relu(tape.add(pre, bias));
}

ad::NodeId gcn_layer(ad::Tape& tape, ad::NodeId h, const ConflictGraph& g, ad::NodeId w) {
    const ad::NodeId s = tape.leaf(g.n(), g.n(), gcn_propagation_matrix(g));
    return tape.relu(tape.matmul(tape.matmul(s, h), w));
}

ad::NodeId sage_layer(ad::Tape& tape, ad::NodeId h, const ConflictGraph& g,
                      ad::NodeId w_self, ad::NodeId w_nbr) {
    const ad::NodeId m = tape.leaf(g.n(), g.n(), mean_aggregation_matrix(g));
    const ad::NodeId self = tape.matmul(h, w_self);
    const ad::NodeId nbr = tape.matmul(tape.matmul(m, h), w_nbr);
    return tape.relu(tape.add(self, nbr));
}

ad::NodeId gin_layer(ad::Tape& tape, ad::NodeId h, const ConflictGraph& g, ad::NodeId eps,
                     ad::NodeId mlp_w1, ad::NodeId mlp_b1, ad::NodeId mlp_w2,
                     ad::NodeId mlp_b2) {
    ad::NodeId agg = tape.add(h, tape.scalar_mul(eps, h));  // (1 + eps) h
    if (!g.directed_edges().empty()) {
        agg = tape.add(agg, tape.scatter_add_edges(h, g.directed_edges()));
    }
    const ad::NodeId hidden = tape.relu(tape.add(tape.matmul(agg, mlp_w1), mlp_b1));
    return tape.add(tape.matmul(hidden, mlp_w2), mlp_b2);
}

ad::NodeId gine_layer(ad::Tape& tape, ad::NodeId h, const ConflictGraph& g, ad::NodeId edge_w,
                      ad::NodeId edge_b, ad::NodeId eps, ad::NodeId mlp_w1, ad::NodeId mlp_b1,
                      ad::NodeId mlp_w2, ad::NodeId mlp_b2) {
    ad::NodeId agg = tape.add(h, tape.scalar_mul(eps, h));
    if (!g.directed_edges().empty()) {
        // Binary conflict edges: phi(e) = edge_w * 1 + edge_b, one shared
        // shift applied to every message before the ReLU.
        const ad::NodeId phi = tape.add(edge_w, edge_b);
        const ad::NodeId messages = tape.relu(tape.add(h, phi));
        agg = tape.add(agg, tape.scatter_add_edges(messages, g.directed_edges()));
    }
    const ad::NodeId hidden = tape.relu(tape.add(tape.matmul(agg, mlp_w1), mlp_b1));
    return tape.add(tape.matmul(hidden, mlp_w2), mlp_b2);
}

ad::NodeId mlp_head(ad::Tape& tape, ad::NodeId h, ad::NodeId w1, ad::NodeId b1, ad::NodeId w2,
                    ad::NodeId b2) {
    const ad::NodeId hidden = tape.relu(tape.add(tape.matmul(h, w1), b1));
    return tape.sigmoid(tape.add(tape.matmul(hidden, w2), b2));
}

TapeModel build_forward(ad::Tape& tape, const ModelParameters& params,
                        const NetworkInstance& inst) {
    const ModelConfig& config = params.config;
    config.require_valid();
    inst.require_valid();
    if (params.flat.size() != params.layout.total) {
        throw ValidationError("parameter vector length does not match the layout");
    }

    const ConflictGraph& g = inst.graph;
    const int n = g.n();

    TapeModel model;
    const auto features = node_features(inst, config.feature_mode);
    model.features = tape.leaf(n, config.input_dim(), features);

    model.params.reserve(params.layout.items.size());
    for (const auto& item : params.layout.items) {
        model.params.push_back(tape.leaf(
            item.rows, item.cols,
            {params.flat.data() + item.offset,
             static_cast<std::size_t>(item.rows) * item.cols}));
    }

    std::size_t next_param = 0;
    auto take = [&]() { return model.params[next_param++]; };

    ad::NodeId h = model.features;
    for (int l = 0; l < config.num_layers; ++l) {
        switch (config.layer_kind) {
            case LayerKind::Gcn: {
                const ad::NodeId w = take();
                h = gcn_layer(tape, h, g, w);
                break;
            }
            case LayerKind::Sage: {
                const ad::NodeId w_self = take();
                const ad::NodeId w_nbr = take();
                h = sage_layer(tape, h, g, w_self, w_nbr);
                break;
            }
            case LayerKind::Gin: {
                const ad::NodeId eps = take();
                const ad::NodeId w1 = take();
                const ad::NodeId b1 = take();
                const ad::NodeId w2 = take();
                const ad::NodeId b2 = take();
                h = gin_layer(tape, h, g, eps, w1, b1, w2, b2);
                break;
            }
            case LayerKind::Gine: {
                const ad::NodeId edge_w = take();
                const ad::NodeId edge_b = take();
                const ad::NodeId eps = take();
                const ad::NodeId w1 = take();
                const ad::NodeId b1 = take();
                const ad::NodeId w2 = take();
                const ad::NodeId b2 = take();
                h = gine_layer(tape, h, g, edge_w, edge_b, eps, w1, b1, w2, b2);
                break;
            }
            case LayerKind::Dgcn: {
                const ad::NodeId w_self = take();
                const ad::NodeId w_nbr = take();
                const ad::NodeId attn = take();
                const ad::NodeId bias = take();
                h = dgcn_layer(tape, h, g, w_self, w_nbr, attn, bias);
                break;
            }
        }
    }

    const ad::NodeId head_w1 = take();
    const ad::NodeId head_b1 = take();
    const ad::NodeId head_w2 = take();
    const ad::NodeId head_b2 = take();
    model.output = mlp_head(tape, h, head_w1, head_b1, head_w2, head_b2);
    return model;
}

std::vector<double> predict(const ModelParameters& params, const NetworkInstance& inst) {
    ad::Tape tape;
    const TapeModel model = build_forward(tape, params, inst);
    const auto out = tape.value(model.output);
    return {out.begin(), out.end()};
}

namespace {

constexpr char kCheckpointMagic[8] = {'P', 'C', 'S', 'M', 'A', 'G', 'N', 'N'};
constexpr std::uint32_t kCheckpointVersion = 1;

void put_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ofstream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::ifstream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::ifstream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

} // namespace

void save_checkpoint(const ModelParameters& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open checkpoint for writing: " + path);
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    put_u32(out, kCheckpointVersion);
    put_u32(out, static_cast<std::uint32_t>(params.config.layer_kind));
    put_u32(out, static_cast<std::uint32_t>(params.config.num_layers));
    put_u32(out, static_cast<std::uint32_t>(params.config.hidden_dim));
    put_u32(out, static_cast<std::uint32_t>(params.config.head_dims[1]));
    put_u32(out, static_cast<std::uint32_t>(params.config.feature_mode));
    put_u64(out, params.config.seed);
    put_u64(out, params.flat.size());
    for (double v : params.flat) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        put_u64(out, bits);
    }
    if (!out) throw ValidationError("checkpoint write failed: " + path);
}

ModelParameters load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kCheckpointMagic, 8) != 0) {
        throw ValidationError("not a model checkpoint: " + path);
    }
    const std::uint32_t version = get_u32(in);
    if (version != kCheckpointVersion) {
        throw ValidationError("unsupported checkpoint version " + std::to_string(version));
    }
    ModelConfig config;
    config.layer_kind = static_cast<LayerKind>(get_u32(in));
    config.num_layers = static_cast<int>(get_u32(in));
    config.hidden_dim = static_cast<int>(get_u32(in));
    const int head_hidden = static_cast<int>(get_u32(in));
    config.head_dims = {config.hidden_dim, head_hidden, 1};
    config.feature_mode = static_cast<FeatureMode>(get_u32(in));
    config.seed = get_u64(in);

    ModelParameters params;
    params.config = config;
    params.layout = ParamLayout::for_config(config);
    const std::uint64_t count = get_u64(in);
    if (count != params.layout.total) {
        throw ValidationError("checkpoint parameter count " + std::to_string(count) +
                              " does not match config (" +
                              std::to_string(params.layout.total) + ")");
    }
    params.flat.resize(count);
    for (auto& v : params.flat) {
        const std::uint64_t bits = get_u64(in);
        std::memcpy(&v, &bits, sizeof(v));
    }
    if (!in) throw ValidationError("truncated checkpoint: " + path);
    return params;
}

} // namespace pcsma
