#include "phsem/sem.hpp"

#include <algorithm>
#include <cmath>

namespace phsem {

namespace {

void check_params(const Dag& g, const SemParams& params) {
    const int p = g.node_count();
    if (params.lambda.rows() != p || params.lambda.cols() != p)
        throw DimensionMismatchError("lambda must be p x p");
    if (params.omega.size() != p)
        throw DimensionMismatchError("omega must have length p");
    for (NodeId i = 0; i < p; ++i) {
        if (!(params.omega(i) > 0.0))
            throw Error("error variances must be strictly positive");
        for (NodeId j = 0; j < p; ++j)
            if (params.lambda(i, j) != 0.0 && !g.has_edge(i, j))
                throw SupportViolationError(
                    "lambda has a nonzero entry off the edge set");
    }
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m,
                          std::span<const NodeId> rows,
                          std::span<const NodeId> cols) {
    Eigen::MatrixXd out(rows.size(), cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c)
            out(r, c) = m(rows[r], cols[c]);
    return out;
}

void check_indices(int p, std::span<const NodeId> s) {
    for (NodeId v : s)
        if (v < 0 || v >= p) throw Error("node id out of range");
}

}  // namespace

Covariance::Covariance(Eigen::MatrixXd sigma, double sym_tol)
    : sigma_(std::move(sigma)) {
    if (sigma_.rows() != sigma_.cols() || sigma_.rows() < 1)
        throw Error("covariance must be square and non-empty");
    const double scale = std::max(1.0, sigma_.cwiseAbs().maxCoeff());
    if ((sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff() > sym_tol * scale)
        throw Error("covariance is not symmetric");
    sigma_ = 0.5 * (sigma_ + sigma_.transpose().eval());
    Eigen::LLT<Eigen::MatrixXd> llt(sigma_);
    if (llt.info() != Eigen::Success)
        throw Error("covariance is not positive definite");
}

Covariance implied_covariance(const Dag& g, const SemParams& params) {
    check_params(g, params);
    const int p = g.node_count();
    const std::vector<NodeId>& order = g.topo();

    // In topological coordinates I - Lambda is unit upper triangular, so
    // Sigma = (I - L)^-T D (I - L)^-1 reduces to one triangular solve.
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(p, p);
    for (int r = 0; r < p; ++r)
        for (int c = r + 1; c < p; ++c)
            a(r, c) = -params.lambda(order[r], order[c]);

    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(p, p);
    for (int r = 0; r < p; ++r) rhs(r, r) = std::sqrt(params.omega(order[r]));

    // y = (I - L)^-T sqrt(D); a^T is unit lower triangular.
    Eigen::MatrixXd y =
        a.transpose().triangularView<Eigen::UnitLower>().solve(rhs);
    Eigen::MatrixXd sigma_perm = y * y.transpose();

    Eigen::MatrixXd sigma(p, p);
    for (int r = 0; r < p; ++r)
        for (int c = 0; c < p; ++c)
            sigma(order[r], order[c]) = sigma_perm(r, c);
    return Covariance(std::move(sigma));
}

double trek_monomial(const Trek& trek, const SemParams& params) {
    double value = params.omega(trek.top());
    for (std::size_t k = 0; k + 1 < trek.left.size(); ++k)
        value *= params.lambda(trek.left[k], trek.left[k + 1]);
    for (std::size_t k = 0; k + 1 < trek.right.size(); ++k)
        value *= params.lambda(trek.right[k], trek.right[k + 1]);
    return value;
}

Covariance trek_covariance(const Dag& g, const SemParams& params,
                           std::size_t budget) {
    check_params(g, params);
    const int p = g.node_count();
    Eigen::MatrixXd sigma(p, p);
    for (NodeId i = 0; i < p; ++i)
        for (NodeId j = i; j < p; ++j) {
            double total = 0.0;
            for (const Trek& trek : enumerate_treks(g, i, j, budget))
                total += trek_monomial(trek, params);
            sigma(i, j) = total;
            sigma(j, i) = total;
        }
    return Covariance(std::move(sigma));
}

double conditional_variance(const Covariance& sigma, NodeId i,
                            std::span<const NodeId> a) {
    const int p = sigma.dim();
    check_indices(p, {&i, 1});
    check_indices(p, a);
    for (NodeId v : a)
        if (v == i) throw Error("conditioning set must not contain the node");
    if (a.empty()) return sigma(i, i);

    const Eigen::MatrixXd saa = submatrix(sigma.matrix(), a, a);
    Eigen::VectorXd sai(a.size());
    for (std::size_t r = 0; r < a.size(); ++r) sai(r) = sigma(a[r], i);
    // Schur complement through an SPD factorization, no explicit inverse.
    Eigen::LDLT<Eigen::MatrixXd> ldlt(saa);
    return sigma(i, i) - sai.dot(ldlt.solve(sai));
}

ConditioningBounds conditioning_bounds(const Dag& g, NodeId i) {
    g.check_node(i);
    return ConditioningBounds{
        g.parents(i), setops::complement(g.node_count(), descendants(g, i))};
}

double recover_error_variance(const Dag& g, const Covariance& sigma, NodeId i,
                              std::span<const NodeId> a) {
    if (sigma.dim() != g.node_count())
        throw DimensionMismatchError("covariance and graph disagree on p");
    const ConditioningBounds bounds = conditioning_bounds(g, i);
    NodeSet sorted(a.begin(), a.end());
    std::sort(sorted.begin(), sorted.end());
    if (!setops::is_subset(bounds.lower, sorted) ||
        !setops::is_subset(sorted, bounds.upper))
        throw InvalidConditioningSetError(
            "conditioning set must satisfy pa(i) <= A <= V\\de(i)");
    return conditional_variance(sigma, i, sorted);
}

bool ci_holds(const Covariance& sigma, NodeId i, NodeId j,
              std::span<const NodeId> s, double tol) {
    const int p = sigma.dim();
    check_indices(p, {&i, 1});
    check_indices(p, {&j, 1});
    check_indices(p, s);
    if (i == j) throw Error("ci_holds requires distinct nodes");
    for (NodeId v : s)
        if (v == i || v == j)
            throw Error("conditioning set must not contain the endpoints");

    NodeSet rows{i}, cols{j};
    rows.insert(rows.end(), s.begin(), s.end());
    cols.insert(cols.end(), s.begin(), s.end());
    const Eigen::MatrixXd m = submatrix(sigma.matrix(), rows, cols);

    // Hadamard bound on |det|; a vanishing row norm forces det = 0.
    double scale = 1.0;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        const double norm = m.row(r).norm();
        if (norm == 0.0) return true;
        scale *= norm;
    }
    return std::abs(m.determinant()) <= tol * scale;
}

bool equal_variance_holds(const Covariance& sigma, NodeId i,
                          std::span<const NodeId> a_i, NodeId j,
                          std::span<const NodeId> a_j, double tol) {
    const double vi = conditional_variance(sigma, i, a_i);
    const double vj = conditional_variance(sigma, j, a_j);
    return std::abs(vi - vj) <= tol * 0.5 * (vi + vj);
}

bool is_member(const Covariance& sigma, const Dag& g, const Partition& pi,
               double tol) {
    const int p = g.node_count();
    if (sigma.dim() != p)
        throw DimensionMismatchError("covariance and graph disagree on p");
    if (pi.node_count() != p)
        throw DimensionMismatchError("partition and graph disagree on p");

    // Local Markov: i _||_ j | pa(i) for every j outside de(i) and pa(i).
    // Pairwise checks suffice under Gaussianity.
    for (NodeId i = 0; i < p; ++i) {
        const NodeSet& pa = g.parents(i);
        const NodeSet de = descendants(g, i);
        for (NodeId j = 0; j < p; ++j) {
            if (setops::contains(de, j) || setops::contains(pa, j) || j == i)
                continue;
            if (!ci_holds(sigma, i, j, pa, tol)) return false;
        }
    }

    // Equal variances within blocks, using the minimal conditioning pair
    // (pa(i), pa(j)); larger valid pairs are implied once the conditional
    // independences hold.
    for (const NodeSet& block : pi.blocks())
        for (std::size_t a = 0; a < block.size(); ++a)
            for (std::size_t b = a + 1; b < block.size(); ++b)
                if (!equal_variance_holds(sigma, block[a],
                                          g.parents(block[a]), block[b],
                                          g.parents(block[b]), tol))
                    return false;
    return true;
}

}  // namespace phsem
