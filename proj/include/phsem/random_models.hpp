#pragma once

#include <Eigen/Dense>
#include <random>

#include "phsem/graph.hpp"
#include "phsem/sem.hpp"

namespace phsem {

// Observations, one row per sample.
struct Dataset {
    Eigen::MatrixXd x;

    long sample_count() const { return x.rows(); }
    int node_count() const { return static_cast<int>(x.cols()); }
};

enum class Regime { sparse, dense };

// Random DAG: include i -> j for i < j independently with the given
// probability, then relabel by a uniform random permutation.
Dag random_dag_gnp(int p, double edge_prob, std::mt19937_64& rng);

// Sparse regime uses adjacency probability 3/(2p-2), dense uses 0.3.
Dag random_dag(int p, Regime regime, std::mt19937_64& rng);
double edge_probability(int p, Regime regime);

// Edge weights uniform on [-1,-0.3] u [0.3,1]; one error variance per
// block, uniform on [0.3, 1], shared by the block's nodes.
SemParams random_sem(const Dag& g, const Partition& pi, std::mt19937_64& rng);

// n independent draws of X = (I-Lambda)^-T eps, eps ~ N(0, diag(omega)),
// generated by ancestral propagation in topological order.
Dataset sample_data(const Dag& g, const SemParams& params, long n,
                    std::mt19937_64& rng);

}  // namespace phsem
