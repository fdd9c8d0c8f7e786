#include "phsem/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include "phsem/equivalence.hpp"
#include "phsem/random.hpp"

namespace phsem {

Partition partition_from_recipe(int p, BlockRecipe recipe,
                                const std::vector<NodeSet>& custom_blocks) {
    if (recipe == BlockRecipe::custom)
        return Partition::from_blocks(p, custom_blocks);

    const int k = recipe == BlockRecipe::two_blocks
                      ? 2
                      : (p + 2) / 3 + 1;  // ceil(p/3) + 1
    if (k > p) throw Error("more blocks than nodes");
    std::vector<int> block_of(p);
    // Contiguous ranges; the first (p mod k) blocks get the extra node.
    const int base = p / k;
    const int extra = p % k;
    int node = 0;
    for (int b = 0; b < k; ++b) {
        const int size = base + (b < extra ? 1 : 0);
        for (int s = 0; s < size; ++s) block_of[node++] = b;
    }
    return Partition(std::move(block_of));
}

Partition partition_from_config(const SimConfig& cfg) {
    return partition_from_recipe(cfg.p, cfg.blocks, cfg.custom_blocks);
}

Quartiles quartiles(std::vector<double> values) {
    if (values.empty()) return {};
    std::sort(values.begin(), values.end());
    auto at = [&](double q) {
        const double h = q * static_cast<double>(values.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(std::floor(h));
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        const double frac = h - static_cast<double>(lo);
        return values[lo] + frac * (values[hi] - values[lo]);
    };
    return Quartiles{at(0.25), at(0.5), at(0.75)};
}

TrialDraw draw_trial(const SimConfig& cfg, const Partition& pi,
                     int replicate) {
    const auto ri = static_cast<std::uint64_t>(replicate);
    std::mt19937_64 rng_graph = make_stream(cfg.seed, "graph", ri);
    Dag truth = random_dag(cfg.p, cfg.regime, rng_graph);
    std::mt19937_64 rng_weights = make_stream(cfg.seed, "weights", ri);
    SemParams params = random_sem(truth, pi, rng_weights);
    std::mt19937_64 rng_noise = make_stream(cfg.seed, "noise", ri);
    Dataset data = sample_data(truth, params, cfg.n, rng_noise);
    return TrialDraw{std::move(truth), std::move(params), std::move(data)};
}

namespace {

TrialResult run_trial(const SimConfig& cfg, const Partition& pi,
                      int replicate) {
    using clock = std::chrono::steady_clock;
    TrialResult trial;
    trial.replicate = replicate;
    try {
        TrialDraw draw = draw_trial(cfg, pi, replicate);
        trial.truth = draw.truth;
        const Pdag target = cpdag(draw.truth, pi);
        const SampleCov cov = sample_covariance(draw.data);

        SearchConfig sc;
        sc.restarts = cfg.restarts;
        sc.neighborhood_cap = cfg.neighborhood_cap;
        sc.max_iters = cfg.max_iters;
        sc.threads = 1;  // trials themselves run in parallel

        sc.seed = derive_seed(cfg.seed, "search",
                              static_cast<std::uint64_t>(replicate));
        auto t0 = clock::now();
        SearchResult gev = greedy_search(cov, pi, sc);
        trial.runtime_gev = std::chrono::duration<double>(clock::now() - t0)
                                .count();
        trial.estimate_gev = gev.cpdag;
        trial.bic_gev = gev.score;
        trial.shd_gev = shd(gev.cpdag, target);

        sc.seed = derive_seed(cfg.seed, "search_min",
                              static_cast<std::uint64_t>(replicate));
        t0 = clock::now();
        SearchResult base =
            greedy_search(cov, Partition::singletons(cfg.p), sc);
        trial.runtime_baseline =
            std::chrono::duration<double>(clock::now() - t0).count();
        trial.estimate_baseline = base.cpdag;
        trial.bic_baseline = base.score;
        trial.shd_baseline_pi_min = shd(base.cpdag, target);
    } catch (const std::exception& e) {
        trial.error = e.what();
    }
    return trial;
}

}  // namespace

ExperimentResult run_experiment(const SimConfig& cfg) {
    if (cfg.replicates < 1) throw Error("replicates must be >= 1");
    const Partition pi = partition_from_config(cfg);

    ExperimentResult result;
    result.trials.resize(cfg.replicates);
    const int threads = std::max(1, std::min(cfg.threads, cfg.replicates));
    if (threads == 1) {
        for (int r = 0; r < cfg.replicates; ++r)
            result.trials[r] = run_trial(cfg, pi, r);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (int r = next.fetch_add(1); r < cfg.replicates;
                     r = next.fetch_add(1))
                    result.trials[r] = run_trial(cfg, pi, r);
            });
        for (auto& th : pool) th.join();
    }

    std::vector<double> gev, baseline;
    for (const TrialResult& trial : result.trials) {
        if (!trial.error.empty()) {
            ++result.summary.trials_failed;
            continue;
        }
        ++result.summary.trials_ok;
        gev.push_back(trial.shd_gev);
        baseline.push_back(trial.shd_baseline_pi_min);
    }
    result.summary.shd_gev = quartiles(std::move(gev));
    result.summary.shd_baseline_pi_min = quartiles(std::move(baseline));
    return result;
}

}  // namespace phsem
