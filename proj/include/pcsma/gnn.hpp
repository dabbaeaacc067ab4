#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcsma/autodiff.hpp"
#include "pcsma/graph.hpp"

namespace pcsma {

enum class LayerKind { Gcn, Sage, Gin, Gine, Dgcn };
enum class FeatureMode { POnly, PAndT };

const char* to_string(LayerKind kind);
LayerKind layer_kind_from_string(const std::string& s);
const char* to_string(FeatureMode mode);
FeatureMode feature_mode_from_string(const std::string& s);

struct ModelConfig {
    LayerKind layer_kind = LayerKind::Dgcn;
    int num_layers = 8;
    int hidden_dim = 64;
    std::vector<int> head_dims = {64, 32, 1};  // input must equal hidden_dim
    FeatureMode feature_mode = FeatureMode::POnly;
    std::uint64_t seed = 0;

    int input_dim() const { return feature_mode == FeatureMode::POnly ? 1 : 2; }
    void require_valid() const;
};

// Flat-vector parameter store with a named-shape directory, so optimizers see
// one contiguous f64 array and layers address tensors by layout position.
struct ParamLayout {
    struct Item {
        std::string name;
        int rows = 0;
        int cols = 0;
        std::size_t offset = 0;
    };
    std::vector<Item> items;
    std::size_t total = 0;

    static ParamLayout for_config(const ModelConfig& config);
};

struct ModelParameters {
    ModelConfig config;
    ParamLayout layout;
    std::vector<double> flat;
};

// Glorot-uniform weights, zero biases / attention vectors / GIN epsilons;
// one RNG child stream per tensor so the draw is independent of layout order.
ModelParameters init_parameters(const ModelConfig& config);

// n x d row-major feature matrix: [p_i] or [p_i, T].
std::vector<double> node_features(const NetworkInstance& inst, FeatureMode mode);

// One message-passing layer each, recorded on the tape. Parameter arguments
// are tape node ids so the same functions serve training, inference, and
// input-gradient extraction.
//
// Decoupled layer: h' = ReLU(h W_self + sum_{u in N(v)} alpha_u ReLU(h_u W_nbr) + b)
// with alpha_u = sigmoid(a . (h_u W_nbr)); the sum is deliberately
// unnormalized, so stacking neighbors stacks their contributions.
ad::NodeId dgcn_layer(ad::Tape& tape, ad::NodeId h, const ConflictGraph& g,
                      ad::NodeId w_self, ad::NodeId w_nbr, ad::NodeId attn, ad::NodeId bias);

// Symmetric normalization with self-loops, single mixed transform, ReLU.
ad::NodeId gcn_layer(ad::Tape& tape, ad::NodeId h, const ConflictGraph& g, ad::NodeId w);

// Separate self/neighbor transforms over the neighbor mean; isolated nodes
// see a zero neighbor vector.
ad::NodeId sage_layer(ad::Tape& tape, ad::NodeId h, const ConflictGraph& g,
                      ad::NodeId w_self, ad::NodeId w_nbr);

// Degree-agnostic sum with learnable (1 + eps) self-weight, then a two-layer
// MLP with an inner ReLU.
ad::NodeId gin_layer(ad::Tape& tape, ad::NodeId h, const ConflictGraph& g, ad::NodeId eps,
                     ad::NodeId mlp_w1, ad::NodeId mlp_b1, ad::NodeId mlp_w2,
                     ad::NodeId mlp_b2);

// GIN plus a learned shared edge shift applied inside a pre-aggregation ReLU
// (binary conflict edges collapse phi(e) to one vector).
ad::NodeId gine_layer(ad::Tape& tape, ad::NodeId h, const ConflictGraph& g, ad::NodeId edge_w,
                      ad::NodeId edge_b, ad::NodeId eps, ad::NodeId mlp_w1, ad::NodeId mlp_b1,
                      ad::NodeId mlp_w2, ad::NodeId mlp_b2);

// hidden -> ReLU -> 1 -> logistic sigmoid.
ad::NodeId mlp_head(ad::Tape& tape, ad::NodeId h, ad::NodeId w1, ad::NodeId b1, ad::NodeId w2,
                    ad::NodeId b2);

// Forward pass recorded on a tape. `features` and `params` expose the leaves
// so callers can pull gradients with respect to inputs or weights.
struct TapeModel {
    ad::NodeId features = -1;            // n x d leaf
    std::vector<ad::NodeId> params;      // one leaf per layout item
    ad::NodeId output = -1;              // n x 1, sigmoid range (0,1)
};

TapeModel build_forward(ad::Tape& tape, const ModelParameters& params,
                        const NetworkInstance& inst);

// Convenience inference on a fresh tape.
std::vector<double> predict(const ModelParameters& params, const NetworkInstance& inst);

// Self-describing binary checkpoint (little-endian); layout documented in the
// README and stable across releases.
void save_checkpoint(const ModelParameters& params, const std::string& path);
ModelParameters load_checkpoint(const std::string& path);

} // namespace pcsma
