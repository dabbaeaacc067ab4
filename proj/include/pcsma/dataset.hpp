#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcsma/graph.hpp"
#include "pcsma/markov.hpp"
#include "pcsma/sim.hpp"

namespace pcsma {

enum class LabelSource { Sim, Mc };

const char* to_string(LabelSource source);
LabelSource label_source_from_string(const std::string& s);

// One labeled sample. Decimal fields persist with 17 significant digits so a
// CSV round-trip reproduces the exact doubles.
struct DatasetRow {
    int n = 0;
    int T = 1;
    std::string adjacency;        // n^2 chars, '0'/'1', row-major
    std::vector<double> p;
    std::vector<double> theta;
    LabelSource label_source = LabelSource::Mc;
    std::uint64_t seed = 0;       // per-sample stream seed
    CollisionMode collision_mode = CollisionMode::TimerRule;

    NetworkInstance to_instance() const;
    void require_valid() const;
};

struct DatasetSpec {
    std::vector<int> n_list;
    std::vector<int> t_list;
    int count_per_cell = 0;
    double p_edge = 0.5;
    LabelSource labeler = LabelSource::Mc;
    std::uint64_t sim_slots = 1'000'000;
    std::uint64_t seed = 0;
    CollisionMode mode = CollisionMode::TimerRule;
    std::size_t state_cap = kDefaultStateCap;
    int threads = 1;
    // Stream index of this spec's first (n, T) cell. Generating a grid one
    // cell at a time with increasing offsets is byte-identical to one call
    // covering the whole grid.
    std::size_t cell_offset = 0;
};

// Independent (graph, p) samples per (n, T) cell, labeled by the exact solver
// or the simulator. Fully deterministic per seed and thread count: sample k of
// cell c draws from Rng(seed).child(c).child(k), with grandchild streams
// 0 = topology, 1 = p-vector, 2 = simulation. MC cells are checked against
// the state cap before any work, listing every offending cell.
std::vector<DatasetRow> generate_dataset(const DatasetSpec& spec);

void write_csv(const std::vector<DatasetRow>& rows, const std::string& path);
std::vector<DatasetRow> load_csv(const std::string& path);

struct SplitRows {
    std::vector<DatasetRow> train;
    std::vector<DatasetRow> val;
    std::vector<DatasetRow> test;
};

// Uniform shuffle with the given seed, then train = floor(f_train N),
// val = floor(f_val N), test = remainder.
SplitRows split_rows(const std::vector<DatasetRow>& rows, double train_frac, double val_frac,
                     std::uint64_t seed);

} // namespace pcsma
