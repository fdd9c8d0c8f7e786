#pragma once

#include <Eigen/Dense>
#include <span>

#include "phsem/graph.hpp"

namespace phsem {

// Parameters of a linear SEM: edge weights lambda(i, j) for i -> j and
// error variances omega(i) > 0. lambda must be supported on the graph's
// edge set wherever the pair is used together.
struct SemParams {
    Eigen::MatrixXd lambda;
    Eigen::VectorXd omega;
};

// Symmetric positive definite covariance matrix.
class Covariance {
public:
    explicit Covariance(Eigen::MatrixXd sigma, double sym_tol = 1e-9);

    int dim() const { return static_cast<int>(sigma_.rows()); }
    const Eigen::MatrixXd& matrix() const { return sigma_; }
    double operator()(NodeId i, NodeId j) const { return sigma_(i, j); }

private:
    Eigen::MatrixXd sigma_;
};

// The valid conditioning sets for recovering omega_ii are exactly the sets
// A with lower <= A <= upper.
struct ConditioningBounds {
    NodeSet lower;  // pa(i)
    NodeSet upper;  // V \ de(i)
};

// Covariance implied by the SEM, (I - Lambda)^-T diag(omega) (I - Lambda)^-1,
// computed by triangular solves in topological order.
// Throws SupportViolationError if lambda has a nonzero entry off the edge set.
Covariance implied_covariance(const Dag& g, const SemParams& params);

// Same covariance by summing trek monomials; an independent oracle for
// implied_covariance, intended for small graphs.
Covariance trek_covariance(const Dag& g, const SemParams& params,
                           std::size_t budget = 1000000);

// Monomial of one trek: omega at the top node times the product of edge
// weights along both sides.
double trek_monomial(const Trek& trek, const SemParams& params);

// Residual variance of X_i after projecting on X_A (Schur complement).
double conditional_variance(const Covariance& sigma, NodeId i,
                            std::span<const NodeId> a);

ConditioningBounds conditioning_bounds(const Dag& g, NodeId i);

// conditional_variance with the pa(i) <= A <= V\de(i) bounds enforced;
// for covariance matrices in the graph's model this returns omega_ii for
// every valid A. Throws InvalidConditioningSetError otherwise.
double recover_error_variance(const Dag& g, const Covariance& sigma, NodeId i,
                              std::span<const NodeId> a);

// Conditional independence X_i _||_ X_j | X_S as the vanishing of
// det(Sigma_{iS,jS}). The determinant is compared against tol times a
// Hadamard bound (product of row norms) so the test is scale-free.
bool ci_holds(const Covariance& sigma, NodeId i, NodeId j,
              std::span<const NodeId> s, double tol = 1e-9);

// Equality of the two conditional variances, relative to their mean.
bool equal_variance_holds(const Covariance& sigma, NodeId i,
                          std::span<const NodeId> a_i, NodeId j,
                          std::span<const NodeId> a_j, double tol = 1e-8);

// Membership of sigma in the model of (g, pi): local Markov conditional
// independences (node vs. non-descendant given parents) plus one equal
// variance constraint per same-block pair, conditioning on the minimal
// pair of parent sets.
bool is_member(const Covariance& sigma, const Dag& g, const Partition& pi,
               double tol = 1e-8);

}  // namespace phsem
