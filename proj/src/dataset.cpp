#include "pcsma/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include "pcsma/errors.hpp"
#include "pcsma/rng.hpp"

namespace pcsma {

const char* to_string(LabelSource source) {
    return source == LabelSource::Sim ? "sim" : "mc";
}

LabelSource label_source_from_string(const std::string& s) {
    if (s == "sim") return LabelSource::Sim;
    if (s == "mc") return LabelSource::Mc;
    throw ValidationError("unknown label source '" + s + "' (sim | mc)");
}

NetworkInstance DatasetRow::to_instance() const {
    return NetworkInstance{ConflictGraph::from_adjacency_string(adjacency), p, T};
}

void DatasetRow::require_valid() const {
    if (static_cast<int>(p.size()) != n || static_cast<int>(theta.size()) != n) {
        throw ValidationError("row vectors do not match n=" + std::to_string(n));
    }
    if (adjacency.size() != static_cast<std::size_t>(n) * n) {
        throw ValidationError("adjacency length " + std::to_string(adjacency.size()) +
                              " != n^2");
    }
    for (double v : p) {
        if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("p out of [0,1]");
    }
    for (double v : theta) {
        if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("theta out of [0,1]");
    }
    if (T < 1) throw ValidationError("T must be >= 1");
    ConflictGraph::from_adjacency_string(adjacency);  // symmetry + diagonal checks
}

namespace {

DatasetRow make_row(const DatasetSpec& spec, int n, int T, const Rng& sample_stream) {
    Rng graph_stream = sample_stream.child(0);
    Rng p_stream = sample_stream.child(1);
    Rng sim_stream = sample_stream.child(2);

    const ConflictGraph graph = erdos_renyi(n, spec.p_edge, graph_stream.seed());
    NetworkInstance inst{graph, {}, T};
    inst.p.reserve(n);
    for (int i = 0; i < n; ++i) inst.p.push_back(p_stream.next_double());

    DatasetRow row;
    row.n = n;
    row.T = T;
    row.adjacency = graph.adjacency_string();
    row.p = inst.p;
    row.label_source = spec.labeler;
    row.seed = sample_stream.seed();
    row.collision_mode = spec.mode;

    if (spec.labeler == LabelSource::Mc) {
        SolveOptions opts;
        opts.mode = spec.mode;
        opts.state_cap = spec.state_cap;
        row.theta = throughput_exact(inst, opts).theta;
    } else {
        row.theta = simulate(inst, spec.sim_slots, sim_stream.seed(), spec.mode).theta_hat;
    }
    return row;
}

} // namespace

std::vector<DatasetRow> generate_dataset(const DatasetSpec& spec) {
    if (spec.n_list.empty() || spec.t_list.empty() || spec.count_per_cell < 1) {
        throw ValidationError("dataset spec needs n-list, t-list, and count >= 1");
    }
    if (spec.labeler == LabelSource::Sim && spec.sim_slots == 0) {
        throw ValidationError("sim labeler needs slots >= 1");
    }

    if (spec.labeler == LabelSource::Mc) {
        std::ostringstream offending;
        for (int n : spec.n_list) {
            for (int T : spec.t_list) {
                if (std::pow(static_cast<double>(T), n) >
                    static_cast<double>(spec.state_cap)) {
                    offending << " (n=" << n << ",T=" << T << " has T^n=" << T << "^" << n
                              << ")";
                }
            }
        }
        const std::string bad = offending.str();
        if (!bad.empty()) {
            throw ResourceError("mc labeling refused, cells exceed state cap " +
                                std::to_string(spec.state_cap) + ":" + bad);
        }
    }

    struct Cell {
        int n;
        int T;
    };
    std::vector<Cell> cells;
    for (int n : spec.n_list) {
        for (int T : spec.t_list) cells.push_back({n, T});
    }

    const std::size_t total =
        cells.size() * static_cast<std::size_t>(spec.count_per_cell);
    std::vector<DatasetRow> rows(total);
    const Rng master(spec.seed);

    auto fill_sample = [&](std::size_t flat) {
        const std::size_t cell_idx = flat / spec.count_per_cell;
        const std::size_t sample_idx = flat % spec.count_per_cell;
        const Cell cell = cells[cell_idx];
        const Rng sample_stream = master.child(spec.cell_offset + cell_idx).child(sample_idx);
        rows[flat] = make_row(spec, cell.n, cell.T, sample_stream);
    };

    const int workers = std::max(1, spec.threads);
    if (workers == 1) {
        for (std::size_t i = 0; i < total; ++i) fill_sample(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= total) return;
                    fill_sample(i);
                }
            });
        }
        for (auto& t : pool) t.join();
    }
    return rows;
}

namespace {

std::string join_doubles(const std::vector<double>& values) {
    std::string out;
    char buf[32];
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out.push_back(';');
        std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
        out += buf;
    }
    return out;
}

std::vector<double> parse_doubles(const std::string& text, int line_no) {
    std::vector<double> values;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find(';', start), text.size());
        const std::string piece = text.substr(start, end - start);
        char* tail = nullptr;
        const double v = std::strtod(piece.c_str(), &tail);
        if (piece.empty() || tail != piece.c_str() + piece.size()) {
            throw ValidationError("line " + std::to_string(line_no) +
                                  ": bad decimal field '" + piece + "'");
        }
        values.push_back(v);
        if (end == text.size()) break;
        start = end + 1;
    }
    return values;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

constexpr const char* kHeader = "n,T,adjacency,p,theta,label_source,seed,collision_mode";

} // namespace

void write_csv(const std::vector<DatasetRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open for writing: " + path);
    out << kHeader << "\n";
    for (const auto& row : rows) {
        out << row.n << ',' << row.T << ',' << row.adjacency << ',' << join_doubles(row.p)
            << ',' << join_doubles(row.theta) << ',' << to_string(row.label_source) << ','
            << row.seed << ',' << to_string(row.collision_mode) << "\n";
    }
    if (!out) throw ValidationError("write failed: " + path);
}

std::vector<DatasetRow> load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open dataset: " + path);
    std::string line;
    if (!std::getline(in, line) || line != kHeader) {
        throw ValidationError(path + ": missing or unexpected header row");
    }
    std::vector<DatasetRow> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 8) {
            throw ValidationError("line " + std::to_string(line_no) + ": expected 8 fields, got " +
                                  std::to_string(fields.size()));
        }
        DatasetRow row;
        try {
            row.n = std::stoi(fields[0]);
            row.T = std::stoi(fields[1]);
            row.adjacency = fields[2];
            row.p = parse_doubles(fields[3], line_no);
            row.theta = parse_doubles(fields[4], line_no);
            row.label_source = label_source_from_string(fields[5]);
            row.seed = std::stoull(fields[6]);
            row.collision_mode = collision_mode_from_string(fields[7]);
            row.require_valid();
        } catch (const ValidationError& e) {
            throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
        } catch (const std::exception& e) {
            throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

SplitRows split_rows(const std::vector<DatasetRow>& rows, double train_frac, double val_frac,
                     std::uint64_t seed) {
    if (!(train_frac >= 0.0 && val_frac >= 0.0 && train_frac + val_frac <= 1.0)) {
        throw ValidationError("split fractions must be nonnegative and sum to <= 1");
    }
    std::vector<std::size_t> order(rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rng.below(i)]);
    }
    const std::size_t n_train = static_cast<std::size_t>(train_frac * rows.size());
    const std::size_t n_val = static_cast<std::size_t>(val_frac * rows.size());
    SplitRows split;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const DatasetRow& row = rows[order[i]];
        if (i < n_train) {
            split.train.push_back(row);
        } else if (i < n_train + n_val) {
            split.val.push_back(row);
        } else {
            split.test.push_back(row);
        }
    }
    return split;
}

} // namespace pcsma
