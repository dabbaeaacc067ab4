#include "pcsma/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "pcsma/autodiff.hpp"
#include "pcsma/errors.hpp"
#include "pcsma/rng.hpp"

namespace pcsma {

Metrics metrics(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.size() != truth.size()) {
        throw ValidationError("metrics: length mismatch " + std::to_string(pred.size()) +
                              " vs " + std::to_string(truth.size()));
    }
    if (pred.empty()) throw ValidationError("metrics: empty inputs");
    double se = 0.0, ae = 0.0, mean_truth = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        se += d * d;
        ae += std::abs(d);
        mean_truth += truth[i];
    }
    const double n = static_cast<double>(pred.size());
    mean_truth /= n;
    Metrics m;
    m.mse = se / n;
    m.mae = ae / n;
    if (mean_truth == 0.0) {
        throw NumericError("NMAE undefined: mean ground-truth throughput is zero");
    }
    m.nmae = m.mae / mean_truth;
    return m;
}

double clip_global_norm(std::vector<double>& grad, double max_norm) {
    double norm_sq = 0.0;
    for (double g : grad) norm_sq += g * g;
    const double norm = std::sqrt(norm_sq);
    if (norm > max_norm && norm > 0.0) {
        const double s = max_norm / norm;
        for (double& g : grad) g *= s;
    }
    return norm;
}

namespace {

struct Sample {
    NetworkInstance inst;
    std::vector<double> theta;
};

std::vector<Sample> to_samples(const std::vector<DatasetRow>& rows) {
    std::vector<Sample> samples;
    samples.reserve(rows.size());
    for (const auto& row : rows) {
        samples.push_back({row.to_instance(), row.theta});
    }
    return samples;
}

// Per-graph MSE and, optionally, the gradient contribution of one sample.
double sample_loss_and_grad(ad::Tape& tape, const ModelParameters& params,
                            const Sample& sample, double grad_scale,
                            std::vector<double>* grad_accum) {
    tape.reset();
    const TapeModel model = build_forward(tape, params, sample.inst);
    const int n = sample.inst.graph.n();
    const ad::NodeId target = tape.leaf(n, 1, sample.theta);
    const ad::NodeId loss = tape.mse(model.output, target);
    const double value = tape.scalar_value(loss);
    if (grad_accum) {
        tape.backward(loss);
        std::size_t offset = 0;
        for (std::size_t t = 0; t < model.params.size(); ++t) {
            const auto g = tape.grad(model.params[t]);
            for (std::size_t i = 0; i < g.size(); ++i) {
                (*grad_accum)[offset + i] += grad_scale * g[i];
            }
            offset += g.size();
        }
    }
    return value;
}

double validation_loss(const ModelParameters& params, const std::vector<Sample>& samples) {
    ad::Tape tape;
    double total = 0.0;
    for (const auto& sample : samples) {
        total += sample_loss_and_grad(tape, params, sample, 0.0, nullptr);
    }
    return total / static_cast<double>(samples.size());
}

class AdamW {
public:
    AdamW(std::size_t size, double weight_decay)
        : m_(size, 0.0), v_(size, 0.0), weight_decay_(weight_decay) {}

    void step(std::vector<double>& theta, const std::vector<double>& grad, double lr) {
        ++t_;
        const double bc1 = 1.0 - std::pow(kBeta1, t_);
        const double bc2 = 1.0 - std::pow(kBeta2, t_);
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * grad[i];
            v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * grad[i] * grad[i];
            const double mhat = m_[i] / bc1;
            const double vhat = v_[i] / bc2;
            // Decoupled decay: applied to the weight itself, outside the
            // moment estimates.
            theta[i] -= lr * (mhat / (std::sqrt(vhat) + kEps) + weight_decay_ * theta[i]);
        }
    }

private:
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEps = 1e-8;
    std::vector<double> m_;
    std::vector<double> v_;
    double weight_decay_;
    int t_ = 0;
};

} // namespace

EvalVectors collect_predictions(const ModelParameters& params,
                                const std::vector<DatasetRow>& rows) {
    EvalVectors out;
    for (const auto& row : rows) {
        const auto pred = predict(params, row.to_instance());
        out.pred.insert(out.pred.end(), pred.begin(), pred.end());
        out.truth.insert(out.truth.end(), row.theta.begin(), row.theta.end());
    }
    return out;
}

Metrics evaluate(const ModelParameters& params, const std::vector<DatasetRow>& rows) {
    const EvalVectors v = collect_predictions(params, rows);
    return metrics(v.pred, v.truth);
}

std::pair<ModelParameters, TrainReport> train(const ModelConfig& config,
                                              const std::vector<DatasetRow>& train_rows,
                                              const std::vector<DatasetRow>& val_rows,
                                              const Hyper& hyper,
                                              const std::vector<DatasetRow>* test_rows) {
    if (train_rows.empty()) throw ValidationError("train: empty training set");
    if (hyper.batch_size < 1) throw ValidationError("train: batch_size must be >= 1");
    const auto start = std::chrono::steady_clock::now();

    const std::vector<Sample> train_samples = to_samples(train_rows);
    const std::vector<Sample> val_samples = to_samples(val_rows);

    ModelParameters params = init_parameters(config);
    ModelParameters best = params;
    AdamW opt(params.flat.size(), hyper.weight_decay);
    TrainReport report;

    double lr = hyper.lr;
    double best_val = std::numeric_limits<double>::infinity();
    int bad_epochs = 0;

    // Shuffle streams live far away from the per-tensor init streams.
    const Rng shuffle_root = Rng(config.seed).child(1'000'000);

    std::vector<std::size_t> order(train_samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    const int workers = std::max(1, hyper.threads);
    std::vector<std::vector<double>> shard_grads(workers);
    std::vector<ad::Tape> shard_tapes(workers);

    std::vector<double> grad(params.flat.size());

    for (int epoch = 1; epoch <= hyper.max_epochs; ++epoch) {
        Rng shuffle = shuffle_root.child(epoch);
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[shuffle.below(i)]);
        }

        double epoch_loss = 0.0;
        for (std::size_t batch_start = 0; batch_start < order.size();
             batch_start += hyper.batch_size) {
            const std::size_t batch_end =
                std::min(batch_start + hyper.batch_size, order.size());
            const std::size_t batch = batch_end - batch_start;
            const double scale = 1.0 / static_cast<double>(batch);

            std::fill(grad.begin(), grad.end(), 0.0);
            double batch_loss = 0.0;

            if (workers == 1) {
                for (std::size_t k = batch_start; k < batch_end; ++k) {
                    batch_loss += sample_loss_and_grad(shard_tapes[0], params,
                                                       train_samples[order[k]], scale, &grad);
                }
            } else {
                // Contiguous shards, reduced in shard order: the sum is
                // identical no matter how threads are scheduled.
                std::vector<double> shard_loss(workers, 0.0);
                std::vector<std::thread> pool;
                const std::size_t chunk = (batch + workers - 1) / workers;
                for (int w = 0; w < workers; ++w) {
                    const std::size_t lo = batch_start + w * chunk;
                    const std::size_t hi = std::min(lo + chunk, batch_end);
                    shard_grads[w].assign(params.flat.size(), 0.0);
                    if (lo >= hi) continue;
                    pool.emplace_back([&, w, lo, hi] {
                        for (std::size_t k = lo; k < hi; ++k) {
                            shard_loss[w] +=
                                sample_loss_and_grad(shard_tapes[w], params,
                                                     train_samples[order[k]], scale,
                                                     &shard_grads[w]);
                        }
                    });
                }
                for (auto& t : pool) t.join();
                for (int w = 0; w < workers; ++w) {
                    batch_loss += shard_loss[w];
                    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += shard_grads[w][i];
                }
            }

            if (!std::isfinite(batch_loss)) {
                std::ostringstream msg;
                msg << "non-finite loss at epoch " << epoch << ", batch starting at sample "
                    << batch_start;
                throw NumericError(msg.str());
            }

            clip_global_norm(grad, hyper.clip_norm);
            opt.step(params.flat, grad, lr);
            epoch_loss += batch_loss;
        }

        // epoch_loss accumulated one unscaled per-graph loss per sample.
        report.train_loss.push_back(epoch_loss / static_cast<double>(train_samples.size()));
        const double val =
            val_samples.empty() ? report.train_loss.back() : validation_loss(params, val_samples);
        if (!std::isfinite(val)) {
            throw NumericError("non-finite validation loss at epoch " + std::to_string(epoch));
        }
        report.val_loss.push_back(val);
        report.epochs = epoch;

        if (val < best_val * (1.0 - hyper.improvement_rtol)) {
            best_val = val;
            best = params;
            report.best_epoch = epoch;
            bad_epochs = 0;
        } else {
            ++bad_epochs;
            if (bad_epochs >= hyper.patience) {
                lr *= hyper.plateau_factor;
                bad_epochs = 0;
            }
        }
        report.lr_trace.push_back(lr);

        if (lr < hyper.min_lr) break;
    }

    report.best_val = best_val;
    if (test_rows && !test_rows->empty()) {
        const Metrics m = evaluate(best, *test_rows);
        report.test_mse = m.mse;
        report.test_mae = m.mae;
        report.test_nmae = m.nmae;
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {std::move(best), report};
}

} // namespace pcsma
