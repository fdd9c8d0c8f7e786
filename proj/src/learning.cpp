#include "phsem/learning.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "phsem/equivalence.hpp"
#include "phsem/random.hpp"

namespace phsem {

SampleCov sample_covariance(const Dataset& data, double tol) {
    const long n = data.sample_count();
    const int p = data.node_count();
    if (n < 2) throw DegenerateDataError("need at least two samples");
    if (p < 1) throw DegenerateDataError("need at least one column");

    Eigen::MatrixXd centered = data.x;
    centered.rowwise() -= data.x.colwise().mean();
    SampleCov out;
    out.s = centered.transpose() * centered / static_cast<double>(n);
    out.n = n;

    const double scale = std::max(1.0, out.s.diagonal().maxCoeff());
    for (int c = 0; c < p; ++c)
        if (out.s(c, c) <= tol * scale)
            throw DegenerateDataError("column " + std::to_string(c) +
                                      " has zero variance");
    return out;
}

namespace {

// Least-squares coefficients of target on preds and the residual variance,
// all read off the covariance matrix.
struct Regression {
    Eigen::VectorXd coef;
    double resvar;
};

Regression regress(const Eigen::MatrixXd& s, NodeId target,
                   const NodeSet& preds, double tol) {
    Regression out;
    if (preds.empty()) {
        out.resvar = s(target, target);
        return out;
    }
    const int k = static_cast<int>(preds.size());
    Eigen::MatrixXd gram(k, k);
    Eigen::VectorXd cross(k);
    for (int r = 0; r < k; ++r) {
        cross(r) = s(preds[r], target);
        for (int c = 0; c < k; ++c) gram(r, c) = s(preds[r], preds[c]);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    const Eigen::VectorXd d = ldlt.vectorD().cwiseAbs();
    if (ldlt.info() != Eigen::Success ||
        d.minCoeff() <= tol * std::max(1.0, d.maxCoeff()))
        throw SingularRegressionError("parent Gram matrix is singular");
    out.coef = ldlt.solve(cross);
    out.resvar = s(target, target) - cross.dot(out.coef);
    if (out.resvar <= tol * std::max(1.0, s(target, target)))
        throw SingularRegressionError("residual variance vanished");
    return out;
}

// Per-node residual variances; the building block shared by fit and score.
std::vector<double> residual_variances(const Dag& g, const SampleCov& s,
                                       double tol,
                                       Eigen::MatrixXd* lambda_out) {
    const int p = g.node_count();
    std::vector<double> resvar(p);
    if (lambda_out) *lambda_out = Eigen::MatrixXd::Zero(p, p);
    for (NodeId i = 0; i < p; ++i) {
        const NodeSet& pa = g.parents(i);
        Regression reg = regress(s.s, i, pa, tol);
        resvar[i] = reg.resvar;
        if (lambda_out)
            for (std::size_t r = 0; r < pa.size(); ++r)
                (*lambda_out)(pa[r], i) = reg.coef(static_cast<int>(r));
    }
    return resvar;
}

double bic_from_resvars(const Dag& g, const Partition& pi,
                        const std::vector<double>& resvar, long n) {
    const double log_n_over_n =
        std::log(static_cast<double>(n)) / static_cast<double>(n);
    double score = 0.0;
    for (const NodeSet& block : pi.blocks()) {
        double pooled = 0.0;
        double parent_count = 0.0;
        for (NodeId i : block) {
            pooled += resvar[i];
            parent_count += static_cast<double>(g.parents(i).size());
        }
        const double size = static_cast<double>(block.size());
        const double omega_hat = pooled / size;
        score += -size * std::log(omega_hat) - size -
                 log_n_over_n * parent_count;
    }
    return 0.5 * score;
}

}  // namespace

FitResult fit_mle(const Dag& g, const Partition& pi, const SampleCov& s,
                  double tol) {
    const int p = g.node_count();
    if (s.s.rows() != p)
        throw DimensionMismatchError("covariance and graph disagree on p");
    if (pi.node_count() != p)
        throw DimensionMismatchError("partition and graph disagree on p");

    FitResult fit;
    const std::vector<double> resvar =
        residual_variances(g, s, tol, &fit.lambda_hat);

    fit.omega_hat.resize(pi.block_count());
    double fit_terms = 0.0;
    for (int k = 0; k < pi.block_count(); ++k) {
        const NodeSet& block = pi.blocks()[k];
        double pooled = 0.0;
        for (NodeId i : block) pooled += resvar[i];
        const double size = static_cast<double>(block.size());
        fit.omega_hat(k) = pooled / size;
        fit_terms += size * (std::log(fit.omega_hat(k)) + 1.0);
    }
    fit.loglik = -0.5 * static_cast<double>(s.n) * fit_terms;
    fit.bic = bic_from_resvars(g, pi, resvar, s.n);
    return fit;
}

double bic_score(const Dag& g, const Partition& pi, const SampleCov& s,
                 double tol) {
    const int p = g.node_count();
    if (s.s.rows() != p)
        throw DimensionMismatchError("covariance and graph disagree on p");
    if (pi.node_count() != p)
        throw DimensionMismatchError("partition and graph disagree on p");
    return bic_from_resvars(g, pi, residual_variances(g, s, tol, nullptr),
                            s.n);
}

const char* edit_kind_name(Edit::Kind kind) {
    switch (kind) {
        case Edit::Kind::remove: return "remove";
        case Edit::Kind::add: return "add";
        case Edit::Kind::reverse: return "reverse";
    }
    return "?";
}

Dag apply_edit(const Dag& g, const Edit& edit) {
    std::vector<Edge> edges = g.edges();
    const Edge target{edit.from, edit.to};
    switch (edit.kind) {
        case Edit::Kind::remove:
            std::erase(edges, target);
            break;
        case Edit::Kind::add:
            edges.push_back(target);
            break;
        case Edit::Kind::reverse:
            std::erase(edges, target);
            edges.emplace_back(edit.to, edit.from);
            break;
    }
    return Dag(g.node_count(), std::move(edges));
}

std::vector<Edit> neighbor_edits(const Dag& g, const Partition& pi) {
    const int p = g.node_count();
    if (pi.node_count() != p)
        throw DimensionMismatchError("partition and graph disagree on p");

    // reach[i][j] = 1 iff there is a directed path i -> ... -> j.
    std::vector<std::vector<std::uint8_t>> reach(p);
    for (NodeId i = 0; i < p; ++i) {
        reach[i].assign(p, 0);
        for (NodeId v : descendants(g, i)) reach[i][v] = 1;
    }

    std::vector<Edit> edits;
    for (const auto& [i, j] : g.edges())
        edits.push_back({Edit::Kind::remove, i, j});

    for (NodeId i = 0; i < p; ++i)
        for (NodeId j = 0; j < p; ++j) {
            if (i == j || g.adjacent(i, j)) continue;
            if (reach[j][i]) continue;  // i -> j would close a cycle
            edits.push_back({Edit::Kind::add, i, j});
        }

    for (const auto& [i, j] : g.edges()) {
        // j -> i stays acyclic iff the only route from i to j was the edge.
        bool other_path = false;
        for (NodeId c : g.children(i))
            if (c != j && reach[c][j]) {
                other_path = true;
                break;
            }
        if (other_path) continue;
        const Edit edit{Edit::Kind::reverse, i, j};
        if (pi_equivalent(g, apply_edit(g, edit), pi)) continue;
        edits.push_back(edit);
    }

    std::sort(edits.begin(), edits.end());
    return edits;
}

std::vector<Edit> neighborhood_edits(const Dag& g, const Partition& pi,
                                     std::size_t cap, std::mt19937_64& rng) {
    std::vector<Edit> edits = neighbor_edits(g, pi);
    if (edits.size() <= cap) return edits;
    std::vector<Edit> sampled;
    sampled.reserve(cap);
    for (std::size_t idx : rand_subset(rng, edits.size(), cap))
        sampled.push_back(edits[idx]);
    return sampled;  // indices sorted, so canonical order is preserved
}

std::vector<Dag> neighborhood(const Dag& g, const Partition& pi,
                              std::size_t cap, std::mt19937_64& rng) {
    std::vector<Dag> out;
    for (const Edit& edit : neighborhood_edits(g, pi, cap, rng))
        out.push_back(apply_edit(g, edit));
    return out;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Strict-improvement slack; absorbs score jitter so the search terminates.
constexpr double kScoreSlack = 1e-12;

double score_or_neg_inf(const Dag& g, const Partition& pi, const SampleCov& s,
                        double tol) {
    try {
        return bic_score(g, pi, s, tol);
    } catch (const SingularRegressionError&) {
        return kNegInf;
    }
}

struct RestartOutcome {
    Dag best;
    double score;
    std::vector<SearchStep> trace;
};

RestartOutcome run_restart(int restart, const SampleCov& s,
                           const Partition& pi, const SearchConfig& cfg) {
    const int p = static_cast<int>(s.s.rows());
    std::mt19937_64 rng =
        make_stream(cfg.seed, "restart", static_cast<std::uint64_t>(restart));

    Dag current = restart == 0 || p < 2
                      ? Dag(p)
                      : random_dag_gnp(p, edge_probability(p, Regime::sparse),
                                       rng);
    double current_score = score_or_neg_inf(current, pi, s, cfg.numeric_tol);

    RestartOutcome out{current, current_score, {}};
    out.trace.push_back({restart, 0, std::nullopt, current_score});

    for (int step = 1; step <= cfg.max_iters; ++step) {
        const std::vector<Edit> edits =
            neighborhood_edits(current, pi, cfg.neighborhood_cap, rng);
        double best_score = current_score;
        const Edit* best_edit = nullptr;
        for (const Edit& edit : edits) {
            const double score =
                score_or_neg_inf(apply_edit(current, edit), pi, s,
                                 cfg.numeric_tol);
            // Canonical scan order: ties keep the earlier (smaller) edit.
            if (score > best_score + kScoreSlack) {
                best_score = score;
                best_edit = &edit;
            }
        }
        if (!best_edit) break;
        current = apply_edit(current, *best_edit);
        current_score = best_score;
        out.trace.push_back({restart, step, *best_edit, current_score});
    }
    out.best = current;
    out.score = current_score;
    return out;
}

}  // namespace

SearchResult greedy_search(const SampleCov& s, const Partition& pi,
                           const SearchConfig& cfg) {
    if (cfg.restarts < 1) throw Error("restarts must be >= 1");
    if (cfg.neighborhood_cap < 1) throw Error("neighborhood cap must be >= 1");
    if (s.s.rows() != pi.node_count())
        throw DimensionMismatchError("covariance and partition disagree on p");

    std::vector<std::optional<RestartOutcome>> outcomes(cfg.restarts);
    const int threads =
        std::max(1, std::min<int>(cfg.threads, cfg.restarts));
    if (threads == 1) {
        for (int r = 0; r < cfg.restarts; ++r)
            outcomes[r] = run_restart(r, s, pi, cfg);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (int r = next.fetch_add(1); r < cfg.restarts;
                     r = next.fetch_add(1))
                    outcomes[r] = run_restart(r, s, pi, cfg);
            });
        for (auto& th : pool) th.join();
    }

    // Merge by restart index: earlier restart wins ties.
    int best = 0;
    for (int r = 1; r < cfg.restarts; ++r)
        if (outcomes[r]->score > outcomes[best]->score) best = r;

    SearchResult result{outcomes[best]->best,
                        cpdag(outcomes[best]->best, pi),
                        outcomes[best]->score,
                        {}};
    for (int r = 0; r < cfg.restarts; ++r)
        result.trace.insert(result.trace.end(), outcomes[r]->trace.begin(),
                            outcomes[r]->trace.end());
    return result;
}

SearchResult greedy_search(const Dataset& data, const Partition& pi,
                           const SearchConfig& cfg) {
    return greedy_search(sample_covariance(data, cfg.numeric_tol), pi, cfg);
}

int shd(const Pdag& a, const Pdag& b) {
    if (a.node_count() != b.node_count())
        throw DimensionMismatchError("graphs disagree on node count");
    const int p = a.node_count();
    int distance = 0;
    for (NodeId i = 0; i < p; ++i)
        for (NodeId j = i + 1; j < p; ++j) {
            // 0 none, 1 i->j, 2 j->i, 3 undirected
            auto mark = [&](const Pdag& g) {
                if (g.has_directed(i, j)) return 1;
                if (g.has_directed(j, i)) return 2;
                if (g.has_undirected(i, j)) return 3;
                return 0;
            };
            const int ma = mark(a), mb = mark(b);
            if (ma == mb) continue;
            if (ma == 0 || mb == 0)
                distance += 1;  // present in exactly one graph
            else if ((ma == 1 && mb == 2) || (ma == 2 && mb == 1))
                distance += 2;  // reversed pair
            else
                distance += 1;  // directed vs undirected
        }
    return distance;
}

}  // namespace phsem
