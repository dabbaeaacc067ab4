#pragma once

#include <cstdint>
#include <vector>

#include "pcsma/dataset.hpp"
#include "pcsma/gnn.hpp"

namespace pcsma {

struct Hyper {
    double lr = 1e-3;
    double weight_decay = 1e-4;   // decoupled, applied directly to weights
    double clip_norm = 1.0;       // global gradient norm before each update
    double plateau_factor = 0.5;
    int patience = 5;             // consecutive non-improving epochs before halving
    double improvement_rtol = 1e-6;
    int max_epochs = 200;
    int batch_size = 32;          // whole graphs per batch
    double min_lr = 1e-5;         // early exit once lr drops below this
    int threads = 1;              // deterministic data-parallel gradient shards
};

struct TrainReport {
    std::vector<double> train_loss;  // per epoch, graph-averaged MSE
    std::vector<double> val_loss;
    std::vector<double> lr_trace;    // lr after each epoch's scheduler step
    int epochs = 0;
    int best_epoch = 0;
    double best_val = 0.0;
    double test_mse = 0.0;           // filled when a test set is supplied
    double test_mae = 0.0;
    double test_nmae = 0.0;
    double wall_seconds = 0.0;
};

struct Metrics {
    double mse = 0.0;
    double mae = 0.0;
    double nmae = 0.0;
};

// Flat per-node metrics: every node of every graph weighs equally.
Metrics metrics(const std::vector<double>& pred, const std::vector<double>& truth);

// Scales `grad` so its global L2 norm is at most `max_norm`; returns the norm
// it had before clipping.
double clip_global_norm(std::vector<double>& grad, double max_norm);

// Predictions for `rows` concatenated in row order, plus the matching truth.
struct EvalVectors {
    std::vector<double> pred;
    std::vector<double> truth;
};
EvalVectors collect_predictions(const ModelParameters& params,
                                const std::vector<DatasetRow>& rows);
Metrics evaluate(const ModelParameters& params, const std::vector<DatasetRow>& rows);

// AdamW + global-norm clipping + reduce-on-plateau, minimizing the
// graph-averaged per-node MSE. Returns the best-validation parameters.
// Deterministic given (rows, config, hyper): shuffles derive from
// config.seed, and multi-threaded shards reduce in fixed order.
std::pair<ModelParameters, TrainReport> train(const ModelConfig& config,
                                              const std::vector<DatasetRow>& train_rows,
                                              const std::vector<DatasetRow>& val_rows,
                                              const Hyper& hyper,
                                              const std::vector<DatasetRow>* test_rows = nullptr);

} // namespace pcsma
