#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phsem/learning.hpp"
#include "phsem/random_models.hpp"

namespace phsem {

enum class BlockRecipe { two_blocks, p_over_3_plus_1, custom };

struct SimConfig {
    int p = 5;
    long n = 1000;
    Regime regime = Regime::sparse;
    BlockRecipe blocks = BlockRecipe::two_blocks;
    std::vector<NodeSet> custom_blocks;  // used when blocks == custom
    int replicates = 1;
    std::uint64_t seed = 0;

    // Search settings shared by both searches of every trial.
    int restarts = 5;
    std::size_t neighborhood_cap = 300;
    int max_iters = 500;
    int threads = 1;
};

// Blocks are contiguous index ranges of near-equal size; the random label
// permutation inside random_dag makes membership random over structure.
Partition partition_from_recipe(int p, BlockRecipe recipe,
                                const std::vector<NodeSet>& custom_blocks);
Partition partition_from_config(const SimConfig& cfg);

struct TrialResult {
    int replicate = 0;
    int shd_gev = -1;
    int shd_baseline_pi_min = -1;
    double runtime_gev = 0.0;       // seconds
    double runtime_baseline = 0.0;  // seconds
    double bic_gev = 0.0;
    double bic_baseline = 0.0;
    std::optional<Dag> truth;
    std::optional<Pdag> estimate_gev;
    std::optional<Pdag> estimate_baseline;
    std::string error;  // empty on success
};

struct Quartiles {
    double q25 = 0.0;
    double median = 0.0;
    double q75 = 0.0;
};

struct ExperimentSummary {
    int trials_ok = 0;
    int trials_failed = 0;
    Quartiles shd_gev;
    Quartiles shd_baseline_pi_min;
};

struct ExperimentResult {
    std::vector<TrialResult> trials;  // ordered by replicate index
    ExperimentSummary summary;
};

// Quantiles with linear interpolation between order statistics.
Quartiles quartiles(std::vector<double> values);

// One draw of (truth DAG, parameters, data) using the replicate's named
// substreams; shared by the experiment harness and the simulate command.
struct TrialDraw {
    Dag truth;
    SemParams params;
    Dataset data;
};
TrialDraw draw_trial(const SimConfig& cfg, const Partition& pi,
                     int replicate);

// Per replicate: draw a truth model, sample data, run the greedy search
// under the configured partition and under the all-singleton partition, and
// record modified SHD of both estimates against the true CPDAG.
ExperimentResult run_experiment(const SimConfig& cfg);

}  // namespace phsem
