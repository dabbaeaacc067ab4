// pcsma: analysis, simulation, learning, and utility optimization for
// heterogeneous p-persistent CSMA networks on conflict graphs.
//
// Subcommands: gen-data, solve, simulate, train, eval, predict, optimize,
// bench. JSON outputs embed a run manifest; CSV/checkpoint artifacts get a
// sidecar <path>.manifest.json.
//
// Exit codes: 0 success, 2 usage error, 3 validation error,
// 4 resource/timeout error, 5 numeric failure.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "pcsma/dataset.hpp"
#include "pcsma/errors.hpp"
#include "pcsma/gnn.hpp"
#include "pcsma/graph.hpp"
#include "pcsma/markov.hpp"
#include "pcsma/numopt.hpp"
#include "pcsma/rng.hpp"
#include "pcsma/sim.hpp"
#include "pcsma/train.hpp"

using json = nlohmann::ordered_json;
using namespace pcsma;

namespace {

constexpr const char* kVersion = "0.1.0";

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> values;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find(',', start), text.size());
        const std::string piece = text.substr(start, end - start);
        if (piece.empty()) throw ValidationError("empty entry in list '" + text + "'");
        values.push_back(std::stoi(piece));
        if (end == text.size()) break;
        start = end + 1;
    }
    return values;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> values;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find(',', start), text.size());
        const std::string piece = text.substr(start, end - start);
        if (piece.empty()) throw ValidationError("empty entry in list '" + text + "'");
        values.push_back(std::stod(piece));
        if (end == text.size()) break;
        start = end + 1;
    }
    return values;
}

// "lo:hi" inclusive, or a single value.
std::pair<int, int> parse_range(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        const int v = std::stoi(text);
        return {v, v};
    }
    const int lo = std::stoi(text.substr(0, colon));
    const int hi = std::stoi(text.substr(colon + 1));
    if (hi < lo) throw ValidationError("range '" + text + "' is reversed");
    return {lo, hi};
}

// "0-1,1-2" undirected edges.
std::vector<std::pair<int, int>> parse_edges(const std::string& text) {
    std::vector<std::pair<int, int>> edges;
    if (text.empty()) return edges;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find(',', start), text.size());
        const std::string piece = text.substr(start, end - start);
        const auto dash = piece.find('-');
        if (dash == std::string::npos) {
            throw ValidationError("edge '" + piece + "' is not of the form u-v");
        }
        edges.emplace_back(std::stoi(piece.substr(0, dash)),
                           std::stoi(piece.substr(dash + 1)));
        if (end == text.size()) break;
        start = end + 1;
    }
    return edges;
}

struct GraphArgs {
    std::string graph_file;
    std::string edges;
    int n = 0;

    void add_options(CLI::App* cmd) {
        cmd->add_option("--graph", graph_file,
                        "file containing the adjacency 0/1 string (dataset format)");
        cmd->add_option("--edges", edges, "inline undirected edge list, e.g. 0-1,1-2");
        cmd->add_option("--n", n, "node count (required with --edges; optional with --graph)");
    }

    ConflictGraph build() const {
        if (!graph_file.empty()) {
            std::ifstream in(graph_file);
            if (!in) throw ValidationError("cannot open graph file: " + graph_file);
            std::string text;
            in >> text;
            return ConflictGraph::from_adjacency_string(text);
        }
        if (n < 1) throw ValidationError("--n is required with --edges");
        return ConflictGraph(n, parse_edges(edges));
    }

    json to_json() const {
        json j;
        if (!graph_file.empty()) j["graph"] = graph_file;
        if (!edges.empty()) j["edges"] = edges;
        if (n > 0) j["n"] = n;
        return j;
    }
};

json manifest_base(const std::string& subcommand, json config) {
    json m;
    m["subcommand"] = subcommand;
    m["tool_version"] = kVersion;
    m["config"] = std::move(config);
    m["inputs"] = json::array();
    m["outputs"] = json::array();
    m["wall_time_s"] = 0.0;
    return m;
}

void write_sidecar_manifest(const json& manifest, const std::string& artifact_path) {
    std::ofstream out(artifact_path + ".manifest.json");
    if (!out) throw ValidationError("cannot write manifest beside " + artifact_path);
    out << manifest.dump(2) << "\n";
}

void emit(const json& doc, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << doc.dump(2) << "\n";
    } else {
        std::ofstream out(out_path);
        if (!out) throw ValidationError("cannot open for writing: " + out_path);
        out << doc.dump(2) << "\n";
    }
}

json report_to_json(const TrainReport& report) {
    json j;
    j["epochs"] = report.epochs;
    j["best_epoch"] = report.best_epoch;
    j["best_val_mse"] = report.best_val;
    j["train_loss"] = report.train_loss;
    j["val_loss"] = report.val_loss;
    j["lr_trace"] = report.lr_trace;
    j["test_mse"] = report.test_mse;
    j["test_mae"] = report.test_mae;
    j["test_nmae"] = report.test_nmae;
    j["wall_time_s"] = report.wall_seconds;
    return j;
}

// ---------------------------------------------------------------------------

struct GenDataArgs {
    std::string n_list, t_list;
    int count = 0;
    double p_edge = 0.5;
    std::string labeler = "mc";
    std::uint64_t seed = 0;
    std::string mode = "timer-rule";
    std::size_t state_cap = kDefaultStateCap;
    int threads = 1;
    std::string out;
};

int run_gen_data(const GenDataArgs& args) {
    const auto start = Clock::now();
    DatasetSpec base;
    base.n_list = parse_int_list(args.n_list);
    base.t_list = parse_int_list(args.t_list);
    base.count_per_cell = args.count;
    base.p_edge = args.p_edge;
    base.seed = args.seed;
    base.mode = collision_mode_from_string(args.mode);
    base.state_cap = args.state_cap;
    base.threads = args.threads;
    if (args.labeler == "mc") {
        base.labeler = LabelSource::Mc;
    } else if (args.labeler.rfind("sim", 0) == 0) {
        base.labeler = LabelSource::Sim;
        const auto colon = args.labeler.find(':');
        base.sim_slots =
            colon == std::string::npos ? 1'000'000 : std::stoull(args.labeler.substr(colon + 1));
    } else {
        throw ValidationError("--labeler must be mc or sim[:slots]");
    }

    // Full-grid cap precheck before any cell starts; the per-cell calls below
    // would otherwise fail midway through a long run.
    if (base.labeler == LabelSource::Mc) {
        std::string offending;
        for (int n : base.n_list) {
            for (int T : base.t_list) {
                if (std::pow(static_cast<double>(T), n) >
                    static_cast<double>(base.state_cap)) {
                    offending += " (n=" + std::to_string(n) + ",T=" + std::to_string(T) +
                                 " has T^n=" + std::to_string(T) + "^" + std::to_string(n) + ")";
                }
            }
        }
        if (!offending.empty()) {
            throw ResourceError("mc labeling refused, cells exceed state cap " +
                                std::to_string(base.state_cap) + ":" + offending);
        }
    }

    std::vector<DatasetRow> rows;
    std::size_t cell_index = 0;
    const std::size_t total_cells = base.n_list.size() * base.t_list.size();
    for (int n : base.n_list) {
        for (int T : base.t_list) {
            DatasetSpec cell = base;
            cell.n_list = {n};
            cell.t_list = {T};
            cell.cell_offset = cell_index;
            const auto cell_rows = generate_dataset(cell);
            rows.insert(rows.end(), cell_rows.begin(), cell_rows.end());
            ++cell_index;
            std::cerr << "cell " << cell_index << "/" << total_cells << " (n=" << n
                      << ", T=" << T << "): " << cell_rows.size() << " rows\n";
        }
    }
    write_csv(rows, args.out);

    json config;
    config["n_list"] = args.n_list;
    config["t_list"] = args.t_list;
    config["count"] = args.count;
    config["p_edge"] = args.p_edge;
    config["labeler"] = args.labeler;
    config["seed"] = args.seed;
    config["mode"] = args.mode;
    config["state_cap"] = args.state_cap;
    config["threads"] = args.threads;
    json manifest = manifest_base("gen-data", config);
    manifest["outputs"].push_back(args.out);
    manifest["wall_time_s"] = seconds_since(start);
    write_sidecar_manifest(manifest, args.out);

    std::cout << "wrote " << rows.size() << " rows to " << args.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct SolveArgs {
    GraphArgs graph;
    std::string p;
    int T = 2;
    std::string mode = "timer-rule";
    std::size_t state_cap = kDefaultStateCap;
    double tol = 1e-12;
    std::string out;
};

int run_solve(const SolveArgs& args) {
    const auto start = Clock::now();
    const ConflictGraph g = args.graph.build();
    NetworkInstance inst{g, parse_double_list(args.p), args.T};

    SolveOptions opts;
    opts.mode = collision_mode_from_string(args.mode);
    opts.state_cap = args.state_cap;
    opts.tol = args.tol;
    const ExactResult result = throughput_exact(inst, opts);

    json config = args.graph.to_json();
    config["p"] = args.p;
    config["t"] = args.T;
    config["mode"] = args.mode;
    config["state_cap"] = args.state_cap;
    config["tol"] = args.tol;
    json manifest = manifest_base("solve", config);
    manifest["wall_time_s"] = seconds_since(start);

    json doc;
    doc["n"] = g.n();
    doc["T"] = args.T;
    doc["mode"] = args.mode;
    doc["state_count"] = result.state_count;
    doc["residual"] = result.residual;
    doc["damped"] = result.damped;
    doc["theta"] = result.theta;
    doc["manifest"] = manifest;
    emit(doc, args.out);
    return 0;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    GraphArgs graph;
    std::string p;
    int T = 2;
    std::uint64_t slots = 1'000'000;
    std::uint64_t seed = 0;
    std::string mode = "timer-rule";
    std::string out;
};

int run_simulate(const SimulateArgs& args) {
    const auto start = Clock::now();
    const ConflictGraph g = args.graph.build();
    NetworkInstance inst{g, parse_double_list(args.p), args.T};
    const SimResult result =
        simulate(inst, args.slots, args.seed, collision_mode_from_string(args.mode));

    json config = args.graph.to_json();
    config["p"] = args.p;
    config["t"] = args.T;
    config["slots"] = args.slots;
    config["seed"] = args.seed;
    config["mode"] = args.mode;
    json manifest = manifest_base("simulate", config);
    manifest["wall_time_s"] = seconds_since(start);

    json doc;
    doc["n"] = g.n();
    doc["T"] = args.T;
    doc["mode"] = args.mode;
    doc["slots"] = args.slots;
    doc["seed"] = args.seed;
    doc["theta"] = result.theta_hat;
    doc["success_starts"] = result.success_starts;
    json se = json::array();
    for (double th : result.theta_hat) se.push_back(standard_error(th, args.T, args.slots));
    doc["standard_error"] = se;
    doc["manifest"] = manifest;
    emit(doc, args.out);
    return 0;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string data;
    std::string arch = "dgcn";
    int layers = 8;
    int hidden = 64;
    int head_hidden = 32;
    std::string features = "p";
    std::uint64_t seed = 0;
    std::string split_fracs = "0.8,0.1";
    std::uint64_t split_seed = 0;
    double lr = 1e-3;
    double weight_decay = 1e-4;
    double clip_norm = 1.0;
    int patience = 5;
    int max_epochs = 200;
    int batch_size = 32;
    double min_lr = 1e-5;
    int threads = 1;
    std::string out;
    std::string report_path;
};

ModelConfig config_from(const TrainArgs& args) {
    ModelConfig config;
    config.layer_kind = layer_kind_from_string(args.arch);
    config.num_layers = args.layers;
    config.hidden_dim = args.hidden;
    config.head_dims = {args.hidden, args.head_hidden, 1};
    config.feature_mode = feature_mode_from_string(args.features);
    config.seed = args.seed;
    return config;
}

int run_train(const TrainArgs& args) {
    const auto start = Clock::now();
    const auto rows = load_csv(args.data);
    const auto fracs = parse_double_list(args.split_fracs);
    if (fracs.size() != 2) throw ValidationError("--split-fracs must be train,val");
    const SplitRows split = split_rows(rows, fracs[0], fracs[1], args.split_seed);

    Hyper hyper;
    hyper.lr = args.lr;
    hyper.weight_decay = args.weight_decay;
    hyper.clip_norm = args.clip_norm;
    hyper.patience = args.patience;
    hyper.max_epochs = args.max_epochs;
    hyper.batch_size = args.batch_size;
    hyper.min_lr = args.min_lr;
    hyper.threads = args.threads;

    const ModelConfig config = config_from(args);
    auto [params, report] = train(config, split.train, split.val, hyper, &split.test);
    save_checkpoint(params, args.out);

    json config_json;
    config_json["data"] = args.data;
    config_json["arch"] = args.arch;
    config_json["layers"] = args.layers;
    config_json["hidden"] = args.hidden;
    config_json["head_hidden"] = args.head_hidden;
    config_json["features"] = args.features;
    config_json["seed"] = args.seed;
    config_json["split_fracs"] = args.split_fracs;
    config_json["split_seed"] = args.split_seed;
    config_json["lr"] = args.lr;
    config_json["weight_decay"] = args.weight_decay;
    config_json["clip_norm"] = args.clip_norm;
    config_json["patience"] = args.patience;
    config_json["max_epochs"] = args.max_epochs;
    config_json["batch_size"] = args.batch_size;
    config_json["min_lr"] = args.min_lr;
    config_json["threads"] = args.threads;
    json manifest = manifest_base("train", config_json);
    manifest["inputs"].push_back(args.data);
    manifest["outputs"].push_back(args.out);
    manifest["wall_time_s"] = seconds_since(start);
    write_sidecar_manifest(manifest, args.out);

    json doc = report_to_json(report);
    doc["checkpoint"] = args.out;
    doc["train_rows"] = split.train.size();
    doc["val_rows"] = split.val.size();
    doc["test_rows"] = split.test.size();
    doc["manifest"] = manifest;
    emit(doc, args.report_path);
    return 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
    std::string checkpoint;
    std::string data;
    std::string subset = "all";
    std::string split_fracs = "0.8,0.1";
    std::uint64_t split_seed = 0;
    std::string out;
};

int run_eval(const EvalArgs& args) {
    const auto start = Clock::now();
    const ModelParameters params = load_checkpoint(args.checkpoint);
    const auto rows = load_csv(args.data);

    std::vector<DatasetRow> subset;
    if (args.subset == "all") {
        subset = rows;
    } else {
        const auto fracs = parse_double_list(args.split_fracs);
        if (fracs.size() != 2) throw ValidationError("--split-fracs must be train,val");
        SplitRows split = split_rows(rows, fracs[0], fracs[1], args.split_seed);
        if (args.subset == "train") {
            subset = std::move(split.train);
        } else if (args.subset == "val") {
            subset = std::move(split.val);
        } else if (args.subset == "test") {
            subset = std::move(split.test);
        } else {
            throw ValidationError("--subset must be all|train|val|test");
        }
    }
    if (subset.empty()) throw ValidationError("selected subset is empty");
    const Metrics m = evaluate(params, subset);

    json config;
    config["checkpoint"] = args.checkpoint;
    config["data"] = args.data;
    config["subset"] = args.subset;
    config["split_fracs"] = args.split_fracs;
    config["split_seed"] = args.split_seed;
    json manifest = manifest_base("eval", config);
    manifest["inputs"] = {args.checkpoint, args.data};
    manifest["wall_time_s"] = seconds_since(start);

    json doc;
    doc["rows"] = subset.size();
    doc["mse"] = m.mse;
    doc["mae"] = m.mae;
    doc["nmae"] = m.nmae;
    doc["manifest"] = manifest;
    emit(doc, args.out);
    return 0;
}

// ---------------------------------------------------------------------------

struct PredictArgs {
    std::string checkpoint;
    GraphArgs graph;
    std::string p;
    int T = 2;
    std::string out;
};

int run_predict(const PredictArgs& args) {
    const auto start = Clock::now();
    const ModelParameters params = load_checkpoint(args.checkpoint);
    const ConflictGraph g = args.graph.build();
    NetworkInstance inst{g, parse_double_list(args.p), args.T};
    const auto theta = predict(params, inst);

    json config = args.graph.to_json();
    config["checkpoint"] = args.checkpoint;
    config["p"] = args.p;
    config["t"] = args.T;
    json manifest = manifest_base("predict", config);
    manifest["inputs"].push_back(args.checkpoint);
    manifest["wall_time_s"] = seconds_since(start);

    json doc;
    doc["n"] = g.n();
    doc["T"] = args.T;
    doc["arch"] = to_string(params.config.layer_kind);
    doc["theta"] = theta;
    doc["manifest"] = manifest;
    emit(doc, args.out);
    return 0;
}

// ---------------------------------------------------------------------------

struct OptimizeArgs {
    std::string backend = "mc-fd";
    std::string checkpoint;
    GraphArgs graph;
    std::string p_init;
    std::string alpha;
    int T = 2;
    double lr = 0.01;
    int iters = 100;
    double eps = 1e-9;
    double fd_step = 1e-4;
    std::string mode = "timer-rule";
    std::size_t state_cap = kDefaultStateCap;
    int threads = 1;
    std::string out;
    std::string csv;
};

int run_optimize(const OptimizeArgs& args) {
    const ConflictGraph g = args.graph.build();
    UtilityProblem problem{g, args.T, parse_double_list(args.alpha)};
    problem.p_init = parse_double_list(args.p_init);
    problem.lr = args.lr;
    problem.iters = args.iters;
    problem.eps = args.eps;
    problem.fd_step = args.fd_step;
    problem.mode = collision_mode_from_string(args.mode);
    problem.state_cap = args.state_cap;
    problem.threads = args.threads;
    problem.backend = backend_from_string(args.backend);

    Trajectory traj;
    if (problem.backend == Backend::McFd) {
        traj = optimize_mc(problem);
    } else {
        if (args.checkpoint.empty()) {
            throw ValidationError("--checkpoint is required for the dgcn-backprop backend");
        }
        traj = optimize_gnn(problem, load_checkpoint(args.checkpoint));
    }

    json config = args.graph.to_json();
    config["backend"] = args.backend;
    if (!args.checkpoint.empty()) config["checkpoint"] = args.checkpoint;
    config["p_init"] = args.p_init;
    config["alpha"] = args.alpha;
    config["t"] = args.T;
    config["lr"] = args.lr;
    config["iters"] = args.iters;
    config["eps"] = args.eps;
    config["fd_step"] = args.fd_step;
    config["mode"] = args.mode;
    config["threads"] = args.threads;
    json manifest = manifest_base("optimize", config);
    manifest["wall_time_s"] = traj.wall_seconds;

    json doc;
    doc["backend"] = args.backend;
    doc["p_init"] = problem.p_init;
    doc["alpha"] = problem.alpha;
    doc["lr"] = args.lr;
    doc["iters"] = args.iters;
    json points = json::array();
    for (const auto& point : traj.points) {
        json pj;
        pj["iter"] = point.iter;
        pj["p"] = point.p;
        pj["theta"] = point.theta;
        pj["J"] = point.J;
        points.push_back(std::move(pj));
    }
    doc["trajectory"] = std::move(points);
    doc["final_p"] = traj.final_p;
    doc["final_J"] = traj.final_J;
    if (traj.mc_eval_J) doc["mc_eval_J"] = *traj.mc_eval_J;
    doc["wall_time_s"] = traj.wall_seconds;
    doc["manifest"] = manifest;
    emit(doc, args.out);

    if (!args.csv.empty()) {
        std::ofstream csv(args.csv);
        if (!csv) throw ValidationError("cannot open for writing: " + args.csv);
        csv << "iter,J";
        for (int i = 0; i < g.n(); ++i) csv << ",p_" << i;
        csv << "\n";
        char buf[32];
        for (const auto& point : traj.points) {
            csv << point.iter;
            std::snprintf(buf, sizeof(buf), "%.17g", point.J);
            csv << ',' << buf;
            for (double p : point.p) {
                std::snprintf(buf, sizeof(buf), "%.17g", p);
                csv << ',' << buf;
            }
            csv << "\n";
        }
        write_sidecar_manifest(manifest, args.csv);
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
    std::string n_range = "5:9";
    std::string t_range = "2:3";
    double budget = 1000.0;
    double p_edge = 0.5;
    std::uint64_t seed = 0;
    int reps = 5;
    int forward_reps = 200;
    std::string checkpoint;
    std::string arch = "dgcn";
    int layers = 8;
    int hidden = 64;
    std::string mode = "timer-rule";
    std::size_t state_cap = kDefaultStateCap;
    std::string out;
};

int run_bench(const BenchArgs& args) {
    const auto start = Clock::now();
    const auto [n_lo, n_hi] = parse_range(args.n_range);
    const auto [t_lo, t_hi] = parse_range(args.t_range);

    ModelParameters params;
    if (!args.checkpoint.empty()) {
        params = load_checkpoint(args.checkpoint);
    } else {
        ModelConfig config;
        config.layer_kind = layer_kind_from_string(args.arch);
        config.num_layers = args.layers;
        config.hidden_dim = args.hidden;
        config.head_dims = {args.hidden, 32, 1};
        config.seed = args.seed;
        params = init_parameters(config);
    }

    const Rng master(args.seed);
    json cells = json::array();
    std::size_t cell_idx = 0;
    for (int T = t_lo; T <= t_hi; ++T) {
        for (int n = n_lo; n <= n_hi; ++n) {
            const Rng cell_stream = master.child(cell_idx++);
            Rng p_stream = cell_stream.child(1);
            NetworkInstance inst{erdos_renyi(n, args.p_edge, cell_stream.child(0).seed()),
                                 {},
                                 T};
            for (int i = 0; i < n; ++i) inst.p.push_back(p_stream.next_double());

            json cell;
            cell["n"] = n;
            cell["T"] = T;
            cell["full_state_space"] = std::pow(static_cast<double>(T), n);

            // Exact solve under the wall-clock budget; min over repetitions
            // keeps sub-millisecond cells stable.
            SolveOptions opts;
            opts.mode = collision_mode_from_string(args.mode);
            opts.state_cap = args.state_cap;
            double best = -1.0;
            bool timed_out = false;
            std::size_t states = 0;
            for (int r = 0; r < args.reps; ++r) {
                const TimingProbe probe = mc_timing_probe(inst, args.budget, opts);
                if (probe.timed_out) {
                    timed_out = true;
                    best = probe.seconds;
                    break;
                }
                states = probe.result->state_count;
                if (best < 0.0 || probe.seconds < best) best = probe.seconds;
            }
            cell["mc_timed_out"] = timed_out;
            cell["mc_seconds"] = timed_out ? json(nullptr) : json(best);
            if (!timed_out) cell["reachable_states"] = states;

            // Model inference time per forward pass.
            const auto t0 = Clock::now();
            for (int r = 0; r < args.forward_reps; ++r) {
                (void)predict(params, inst);
            }
            cell["gnn_seconds"] =
                seconds_since(t0) / static_cast<double>(args.forward_reps);
            cells.push_back(std::move(cell));
            std::cerr << "bench cell n=" << n << " T=" << T << " done\n";
        }
    }

    json config;
    config["n_range"] = args.n_range;
    config["t_range"] = args.t_range;
    config["budget_s"] = args.budget;
    config["p_edge"] = args.p_edge;
    config["seed"] = args.seed;
    config["reps"] = args.reps;
    config["forward_reps"] = args.forward_reps;
    config["arch"] = args.checkpoint.empty() ? args.arch : "checkpoint";
    if (!args.checkpoint.empty()) config["checkpoint"] = args.checkpoint;
    config["mode"] = args.mode;
    json manifest = manifest_base("bench", config);
    manifest["wall_time_s"] = seconds_since(start);

    json doc;
    doc["cells"] = std::move(cells);
    doc["manifest"] = manifest;
    emit(doc, args.out);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"p-CSMA saturation-throughput toolkit"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    GenDataArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-data", "generate a labeled dataset CSV");
    gen_cmd->add_option("--n-list", gen.n_list, "node counts, e.g. 4,6,8")->required();
    gen_cmd->add_option("--t-list", gen.t_list, "packet durations, e.g. 2,3")->required();
    gen_cmd->add_option("--count", gen.count, "samples per (n,T) cell")->required();
    gen_cmd->add_option("--p-edge", gen.p_edge, "edge probability (default 0.5)");
    gen_cmd->add_option("--labeler", gen.labeler, "mc or sim[:slots] (default mc)");
    gen_cmd->add_option("--seed", gen.seed, "master seed");
    gen_cmd->add_option("--mode", gen.mode, "timer-rule | hold-T");
    gen_cmd->add_option("--state-cap", gen.state_cap, "maximum T^n for mc labeling");
    gen_cmd->add_option("--threads", gen.threads, "worker threads (1 = reproducibility mode)");
    gen_cmd->add_option("--out", gen.out, "output CSV path")->required();

    SolveArgs solve;
    auto* solve_cmd = app.add_subcommand("solve", "exact per-node saturation throughput");
    solve.graph.add_options(solve_cmd);
    solve_cmd->add_option("--p", solve.p, "attempt probabilities, e.g. 0.5,0.3")->required();
    solve_cmd->add_option("--t", solve.T, "packet duration")->required();
    solve_cmd->add_option("--mode", solve.mode, "timer-rule | hold-T");
    solve_cmd->add_option("--state-cap", solve.state_cap, "state cap");
    solve_cmd->add_option("--tol", solve.tol, "stationary residual tolerance");
    solve_cmd->add_option("--out", solve.out, "output JSON path (default stdout)");

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo throughput estimate");
    sim.graph.add_options(sim_cmd);
    sim_cmd->add_option("--p", sim.p, "attempt probabilities")->required();
    sim_cmd->add_option("--t", sim.T, "packet duration")->required();
    sim_cmd->add_option("--slots", sim.slots, "slot count (default 1e6)");
    sim_cmd->add_option("--seed", sim.seed, "RNG seed");
    sim_cmd->add_option("--mode", sim.mode, "timer-rule | hold-T");
    sim_cmd->add_option("--out", sim.out, "output JSON path (default stdout)");

    TrainArgs tr;
    auto* train_cmd = app.add_subcommand("train", "train a throughput predictor");
    train_cmd->add_option("--data", tr.data, "dataset CSV")->required();
    train_cmd->add_option("--arch", tr.arch, "gcn|sage|gin|gine|dgcn (default dgcn)");
    train_cmd->add_option("--layers", tr.layers, "message-passing layers (default 8)");
    train_cmd->add_option("--hidden", tr.hidden, "hidden width (default 64)");
    train_cmd->add_option("--head-hidden", tr.head_hidden, "head hidden width (default 32)");
    train_cmd->add_option("--features", tr.features, "p | pT (default p)");
    train_cmd->add_option("--seed", tr.seed, "init/shuffle seed");
    train_cmd->add_option("--split-fracs", tr.split_fracs, "train,val fractions (default 0.8,0.1)");
    train_cmd->add_option("--split-seed", tr.split_seed, "split shuffle seed");
    train_cmd->add_option("--lr", tr.lr, "learning rate (default 1e-3)");
    train_cmd->add_option("--weight-decay", tr.weight_decay, "decoupled decay (default 1e-4)");
    train_cmd->add_option("--clip-norm", tr.clip_norm, "global grad-norm cap (default 1.0)");
    train_cmd->add_option("--patience", tr.patience, "plateau patience (default 5)");
    train_cmd->add_option("--epochs", tr.max_epochs, "max epochs (default 200)");
    train_cmd->add_option("--batch", tr.batch_size, "graphs per batch (default 32)");
    train_cmd->add_option("--min-lr", tr.min_lr, "early-exit lr threshold (default 1e-5)");
    train_cmd->add_option("--threads", tr.threads, "gradient shards (1 = reproducibility mode)");
    train_cmd->add_option("--out", tr.out, "checkpoint output path")->required();
    train_cmd->add_option("--report", tr.report_path, "train report JSON path (default stdout)");

    EvalArgs ev;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    eval_cmd->add_option("--checkpoint", ev.checkpoint, "model checkpoint")->required();
    eval_cmd->add_option("--data", ev.data, "dataset CSV")->required();
    eval_cmd->add_option("--subset", ev.subset, "all|train|val|test (default all)");
    eval_cmd->add_option("--split-fracs", ev.split_fracs, "train,val fractions");
    eval_cmd->add_option("--split-seed", ev.split_seed, "split shuffle seed");
    eval_cmd->add_option("--out", ev.out, "output JSON path (default stdout)");

    PredictArgs pr;
    auto* predict_cmd = app.add_subcommand("predict", "predict throughput for one instance");
    predict_cmd->add_option("--checkpoint", pr.checkpoint, "model checkpoint")->required();
    pr.graph.add_options(predict_cmd);
    predict_cmd->add_option("--p", pr.p, "attempt probabilities")->required();
    predict_cmd->add_option("--t", pr.T, "packet duration")->required();
    predict_cmd->add_option("--out", pr.out, "output JSON path (default stdout)");

    OptimizeArgs opt;
    auto* opt_cmd = app.add_subcommand("optimize", "projected gradient ascent on log utility");
    opt_cmd->add_option("--backend", opt.backend, "mc-fd | dgcn-backprop (default mc-fd)");
    opt_cmd->add_option("--checkpoint", opt.checkpoint, "model checkpoint (dgcn-backprop)");
    opt.graph.add_options(opt_cmd);
    opt_cmd->add_option("--p-init", opt.p_init, "initial probabilities")->required();
    opt_cmd->add_option("--alpha", opt.alpha, "utility weights")->required();
    opt_cmd->add_option("--t", opt.T, "packet duration")->required();
    opt_cmd->add_option("--lr", opt.lr, "step size (default 0.01)");
    opt_cmd->add_option("--iters", opt.iters, "iterations (default 100)");
    opt_cmd->add_option("--eps", opt.eps, "utility floor (default 1e-9)");
    opt_cmd->add_option("--fd-step", opt.fd_step, "finite-difference step (default 1e-4)");
    opt_cmd->add_option("--mode", opt.mode, "timer-rule | hold-T");
    opt_cmd->add_option("--state-cap", opt.state_cap, "state cap for exact solves");
    opt_cmd->add_option("--threads", opt.threads, "parallel coordinate solves");
    opt_cmd->add_option("--out", opt.out, "trajectory JSON path (default stdout)");
    opt_cmd->add_option("--csv", opt.csv, "companion flat CSV (iter,J,p_0..p_{n-1})");

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "exact-vs-model timing sweep");
    bench_cmd->add_option("--n-range", bench.n_range, "node range lo:hi (default 5:9)");
    bench_cmd->add_option("--t-range", bench.t_range, "duration range lo:hi (default 2:3)");
    bench_cmd->add_option("--budget", bench.budget, "per-solve budget seconds (default 1000)");
    bench_cmd->add_option("--p-edge", bench.p_edge, "edge probability (default 0.5)");
    bench_cmd->add_option("--seed", bench.seed, "instance seed");
    bench_cmd->add_option("--reps", bench.reps, "solve repetitions, min taken (default 5)");
    bench_cmd->add_option("--forward-reps", bench.forward_reps,
                          "inference repetitions, mean taken (default 200)");
    bench_cmd->add_option("--checkpoint", bench.checkpoint, "model checkpoint (optional)");
    bench_cmd->add_option("--arch", bench.arch, "architecture when no checkpoint given");
    bench_cmd->add_option("--layers", bench.layers, "layers when no checkpoint given");
    bench_cmd->add_option("--hidden", bench.hidden, "hidden width when no checkpoint given");
    bench_cmd->add_option("--mode", bench.mode, "timer-rule | hold-T");
    bench_cmd->add_option("--state-cap", bench.state_cap, "state cap");
    bench_cmd->add_option("--out", bench.out, "output JSON path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen_cmd->parsed()) return run_gen_data(gen);
        if (solve_cmd->parsed()) return run_solve(solve);
        if (sim_cmd->parsed()) return run_simulate(sim);
        if (train_cmd->parsed()) return run_train(tr);
        if (eval_cmd->parsed()) return run_eval(ev);
        if (predict_cmd->parsed()) return run_predict(pr);
        if (opt_cmd->parsed()) return run_optimize(opt);
        if (bench_cmd->parsed()) return run_bench(bench);
    } catch (const ResourceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
