#pragma once

#include <Eigen/Dense>
#include <compare>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "phsem/graph.hpp"
#include "phsem/random_models.hpp"

namespace phsem {

// Sample covariance S = X^T X / n of the column-centered data (divisor n).
struct SampleCov {
    Eigen::MatrixXd s;
    long n = 0;
};

// Tolerance below which a Gram pivot or residual variance counts as zero.
inline constexpr double kDefaultNumericTol = 1e-12;

// Throws DegenerateDataError when n < 2 or a column has zero variance.
SampleCov sample_covariance(const Dataset& data,
                            double tol = kDefaultNumericTol);

struct FitResult {
    Eigen::MatrixXd lambda_hat;  // supported on the graph's edges
    Eigen::VectorXd omega_hat;   // one per partition block
    double loglik = 0.0;
    double bic = 0.0;
};

// Maximum likelihood fit of (g, pi): per-node least squares for the edge
// weights, residual variances pooled within blocks. Throws
// SingularRegressionError when a parent Gram matrix is numerically
// singular or a residual variance vanishes.
FitResult fit_mle(const Dag& g, const Partition& pi, const SampleCov& s,
                  double tol = kDefaultNumericTol);

// BIC score (per-sample scale):
//   1/2 sum_k ( -|pi_k| log w_k - |pi_k| - (log n / n) sum_{i in pi_k} |pa(i)| )
double bic_score(const Dag& g, const Partition& pi, const SampleCov& s,
                 double tol = kDefaultNumericTol);

// One local move; ordering (removal < addition < reversal, then endpoints)
// fixes the tie-break between equally scoring neighbors.
struct Edit {
    enum class Kind { remove = 0, add = 1, reverse = 2 };
    Kind kind;
    NodeId from;
    NodeId to;

    auto operator<=>(const Edit&) const = default;
};

const char* edit_kind_name(Edit::Kind kind);

Dag apply_edit(const Dag& g, const Edit& edit);

// All acyclic single-edge edits, in canonical order. Reversals that land in
// the same pi-equivalence class are excluded (they cannot change the score).
std::vector<Edit> neighbor_edits(const Dag& g, const Partition& pi);

// neighbor_edits capped at `cap` by a uniform subsample (canonical order
// preserved).
std::vector<Edit> neighborhood_edits(const Dag& g, const Partition& pi,
                                     std::size_t cap, std::mt19937_64& rng);

// The capped neighborhood, materialized.
std::vector<Dag> neighborhood(const Dag& g, const Partition& pi,
                              std::size_t cap, std::mt19937_64& rng);

struct SearchConfig {
    int restarts = 5;
    std::size_t neighborhood_cap = 300;
    std::uint64_t seed = 0;
    int max_iters = 500;
    int threads = 1;                       // restarts may run in parallel
    double numeric_tol = kDefaultNumericTol;
};

// One accepted move (edit empty for a restart's initial state).
struct SearchStep {
    int restart;
    int step;
    std::optional<Edit> edit;
    double score;
};

struct SearchResult {
    Dag best;
    Pdag cpdag;
    double score;
    std::vector<SearchStep> trace;
};

// Restarted greedy BIC search over DAGs. Restart 0 starts from the empty
// graph, later restarts from random sparse DAGs. Deterministic given
// cfg.seed; neighbors with singular regressions score -inf.
SearchResult greedy_search(const SampleCov& s, const Partition& pi,
                           const SearchConfig& cfg);
SearchResult greedy_search(const Dataset& data, const Partition& pi,
                           const SearchConfig& cfg);

// Structural Hamming distance charging 2 per oppositely directed pair and
// 1 per partial disagreement.
int shd(const Pdag& a, const Pdag& b);

}  // namespace phsem
