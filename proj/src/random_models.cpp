#include "phsem/random_models.hpp"

#include <cmath>

#include "phsem/random.hpp"

namespace phsem {

double edge_probability(int p, Regime regime) {
    if (p < 2) throw Error("random DAGs need p >= 2");
    return regime == Regime::sparse ? 3.0 / (2.0 * p - 2.0) : 0.3;
}

Dag random_dag_gnp(int p, double edge_prob, std::mt19937_64& rng) {
    if (p < 2) throw Error("random DAGs need p >= 2");
    std::vector<Edge> edges;
    for (NodeId i = 0; i < p; ++i)
        for (NodeId j = i + 1; j < p; ++j)
            if (rand_unit(rng) < edge_prob) edges.emplace_back(i, j);
    const std::vector<int> perm = rand_permutation(rng, p);
    for (auto& [i, j] : edges) {
        i = perm[i];
        j = perm[j];
    }
    return Dag(p, std::move(edges));
}

Dag random_dag(int p, Regime regime, std::mt19937_64& rng) {
    return random_dag_gnp(p, edge_probability(p, regime), rng);
}

SemParams random_sem(const Dag& g, const Partition& pi, std::mt19937_64& rng) {
    const int p = g.node_count();
    if (pi.node_count() != p)
        throw DimensionMismatchError("partition and graph disagree on p");
    SemParams params;
    params.lambda = Eigen::MatrixXd::Zero(p, p);
    for (const auto& [i, j] : g.edges()) {
        const double magnitude = rand_uniform(rng, 0.3, 1.0);
        const double sign = rand_unit(rng) < 0.5 ? -1.0 : 1.0;
        params.lambda(i, j) = sign * magnitude;
    }
    Eigen::VectorXd block_var(pi.block_count());
    for (int k = 0; k < pi.block_count(); ++k)
        block_var(k) = rand_uniform(rng, 0.3, 1.0);
    params.omega.resize(p);
    for (NodeId v = 0; v < p; ++v) params.omega(v) = block_var(pi.block_of(v));
    return params;
}

Dataset sample_data(const Dag& g, const SemParams& params, long n,
                    std::mt19937_64& rng) {
    const int p = g.node_count();
    if (params.lambda.rows() != p || params.omega.size() != p)
        throw DimensionMismatchError("parameters and graph disagree on p");
    if (n < 1) throw Error("sample count must be >= 1");

    Eigen::VectorXd noise_sd = params.omega.cwiseSqrt();
    const std::vector<NodeId>& order = g.topo();

    Dataset data;
    data.x.resize(n, p);
    Eigen::VectorXd row(p);
    for (long s = 0; s < n; ++s) {
        for (NodeId v = 0; v < p; ++v) row(v) = noise_sd(v) * rand_normal(rng);
        for (NodeId v : order)
            for (NodeId u : g.parents(v)) row(v) += params.lambda(u, v) * row(u);
        data.x.row(s) = row;
    }
    return data;
}

}  // namespace phsem
