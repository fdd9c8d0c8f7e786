#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "phsem/random.hpp"
#include "phsem/random_models.hpp"
#include "phsem/sem.hpp"

using namespace phsem;
namespace pt = phsem::testing;

namespace {

SemParams zero_params(int p, std::initializer_list<double> omega) {
    SemParams params;
    params.lambda = Eigen::MatrixXd::Zero(p, p);
    params.omega = Eigen::VectorXd(p);
    int k = 0;
    for (double w : omega) params.omega(k++) = w;
    return params;
}

SemParams chain_params(double lam) {
    SemParams params = zero_params(2, {1.0, 1.0});
    params.lambda(0, 1) = lam;
    return params;
}

double rel_dev(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

TEST_CASE("implied covariance of the empty graph is diagonal") {
    Covariance sigma = implied_covariance(Dag(2), zero_params(2, {2.0, 5.0}));
    CHECK(sigma(0, 0) == doctest::Approx(2.0));
    CHECK(sigma(1, 1) == doctest::Approx(5.0));
    CHECK(sigma(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("implied covariance of the two-node chain") {
    const double lam = 0.8;
    Covariance sigma =
        implied_covariance(Dag(2, {{0, 1}}), chain_params(lam));
    CHECK(sigma(0, 0) == doctest::Approx(1.0));
    CHECK(sigma(0, 1) == doctest::Approx(lam));
    CHECK(sigma(1, 1) == doctest::Approx(1.0 + lam * lam));
}

TEST_CASE("implied covariance matches the hand-computed 3-node model") {
    const double a = 0.8, b = -0.5, w = 1.3, v = 0.7;
    Covariance sigma = pt::fig1_sigma(a, b, w, v);
    // paper nodes (1,2,3) are indices (0,1,2)
    CHECK(sigma(0, 0) == doctest::Approx(w));
    CHECK(sigma(0, 2) == doctest::Approx(a * w));
    CHECK(sigma(2, 2) == doctest::Approx(a * a * w + v));
    CHECK(sigma(1, 2) == doctest::Approx(b * (a * a * w + v)));
    CHECK(sigma(0, 1) == doctest::Approx(a * b * w));
    CHECK(sigma(1, 1) == doctest::Approx(b * b * (a * a * w + v) + w));
}

TEST_CASE("support violations are rejected") {
    SemParams params = chain_params(0.5);
    params.lambda(1, 0) = 0.1;  // not an edge
    CHECK_THROWS_AS(implied_covariance(Dag(2, {{0, 1}}), params),
                    SupportViolationError);
    CHECK_THROWS_AS(trek_covariance(Dag(2, {{0, 1}}), params),
                    SupportViolationError);

    SemParams bad_omega = chain_params(0.5);
    bad_omega.omega(0) = 0.0;
    CHECK_THROWS(implied_covariance(Dag(2, {{0, 1}}), bad_omega));
}

TEST_CASE("trek covariance on tiny graphs") {
    Covariance diag = trek_covariance(Dag(2), zero_params(2, {2.0, 5.0}));
    CHECK(diag(0, 0) == doctest::Approx(2.0));
    CHECK(diag(1, 1) == doctest::Approx(5.0));
    CHECK(diag(0, 1) == doctest::Approx(0.0));

    const double lam = 0.8;
    Covariance chain = trek_covariance(Dag(2, {{0, 1}}), chain_params(lam));
    CHECK(chain(0, 1) == doctest::Approx(lam));
    CHECK(chain(1, 1) == doctest::Approx(1.0 + lam * lam));
}

TEST_CASE("trek covariance equals the matrix formula on random models") {
    std::mt19937_64 rng = make_stream(23, "oracle");
    for (int rep = 0; rep < 50; ++rep) {
        const int p = 2 + static_cast<int>(rand_index(rng, 7));
        Dag g = random_dag(p, Regime::sparse, rng);
        SemParams params = random_sem(g, Partition::singletons(p), rng);
        Covariance direct = implied_covariance(g, params);
        Covariance treks = trek_covariance(g, params);
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j)
                CHECK(rel_dev(direct(i, j), treks(i, j)) < 1e-10);
    }
}

TEST_CASE("conditional variance") {
    const double lam = 0.8;
    Covariance chain =
        implied_covariance(Dag(2, {{0, 1}}), chain_params(lam));
    CHECK(conditional_variance(chain, 1, NodeSet{}) ==
          doctest::Approx(1.0 + lam * lam));
    CHECK(conditional_variance(chain, 1, NodeSet{0}) == doctest::Approx(1.0));

    Covariance id(Eigen::MatrixXd::Identity(4, 4));
    CHECK(conditional_variance(id, 2, NodeSet{0, 1, 3}) ==
          doctest::Approx(1.0));
    CHECK_THROWS(conditional_variance(id, 2, NodeSet{2}));
}

TEST_CASE("conditioning bounds") {
    Dag chain(3, {{0, 1}, {1, 2}});
    ConditioningBounds source = conditioning_bounds(chain, 0);
    CHECK(source.lower.empty());
    CHECK(source.upper.empty());  // everything descends from the source

    ConditioningBounds sink = conditioning_bounds(chain, 2);
    CHECK(sink.lower == NodeSet{1});
    CHECK(sink.upper == NodeSet{0, 1});

    // node "5" of the six-node example is index 4
    ConditioningBounds mid = conditioning_bounds(pt::fig3_dag(), 4);
    CHECK(mid.lower == NodeSet{0, 1, 2});
    CHECK(mid.upper == NodeSet{0, 1, 2, 3, 5});
}

TEST_CASE("error variance recovery on the chain") {
    const double lam = 0.8;
    Dag g(2, {{0, 1}});
    Covariance sigma = implied_covariance(g, chain_params(lam));

    CHECK(recover_error_variance(g, sigma, 1, NodeSet{0}) ==
          doctest::Approx(1.0));
    CHECK(recover_error_variance(g, sigma, 0, NodeSet{}) ==
          doctest::Approx(1.0));
    CHECK_THROWS_AS(recover_error_variance(g, sigma, 0, NodeSet{1}),
                    InvalidConditioningSetError);

    // conditioning on a descendant biases the raw conditional variance down
    const double biased = conditional_variance(sigma, 0, NodeSet{1});
    CHECK(biased ==
          doctest::Approx(1.0 - lam * lam / (1.0 + lam * lam)));
    CHECK(biased < 1.0);
}

TEST_CASE("every valid conditioning set recovers the error variance") {
    std::mt19937_64 rng = make_stream(29, "recovery");
    for (int rep = 0; rep < 20; ++rep) {
        const int p = 2 + static_cast<int>(rand_index(rng, 5));
        Dag g = random_dag(p, Regime::sparse, rng);
        Partition pi = pt::random_partition(p, rng);
        SemParams params = random_sem(g, pi, rng);
        Covariance sigma = implied_covariance(g, params);
        for (NodeId i = 0; i < p; ++i) {
            const ConditioningBounds bounds = conditioning_bounds(g, i);
            const NodeSet extra =
                setops::set_minus(bounds.upper, bounds.lower);
            for (std::size_t mask = 0;
                 mask < (std::size_t{1} << extra.size()); ++mask) {
                NodeSet a = bounds.lower;
                for (std::size_t b = 0; b < extra.size(); ++b)
                    if (mask >> b & 1) a.push_back(extra[b]);
                std::sort(a.begin(), a.end());
                const double recovered =
                    recover_error_variance(g, sigma, i, a);
                CHECK(std::abs(recovered - params.omega(i)) <=
                      1e-8 * params.omega(i));
            }
        }
    }
}

TEST_CASE("invalid conditioning sets admit breaking witnesses") {
    std::mt19937_64 rng = make_stream(31, "witness");
    for (int rep = 0; rep < 20; ++rep) {
        const int p = 3 + static_cast<int>(rand_index(rng, 4));
        Dag g = random_dag(p, Regime::sparse, rng);
        for (NodeId i = 0; i < p; ++i) {
            const ConditioningBounds bounds = conditioning_bounds(g, i);
            for (std::size_t mask = 0;
                 mask < (std::size_t{1} << (p - 1)); ++mask) {
                NodeSet a;
                for (NodeId v = 0, b = 0; v < p; ++v) {
                    if (v == i) continue;
                    if (mask >> b & 1) a.push_back(v);
                    ++b;
                }
                const bool valid = setops::is_subset(bounds.lower, a) &&
                                   setops::is_subset(a, bounds.upper);
                if (valid) continue;
                SemParams params = pt::invalid_set_witness(g, i, a);
                Covariance sigma = implied_covariance(g, params);
                const double cv = conditional_variance(sigma, i, a);
                CHECK(std::abs(cv - params.omega(i)) > 1e-6);
            }
        }
    }
}

TEST_CASE("conditional independence constraints") {
    Covariance id(Eigen::MatrixXd::Identity(3, 3));
    CHECK(ci_holds(id, 0, 1, NodeSet{2}));
    CHECK(ci_holds(id, 0, 2, NodeSet{}));

    Covariance sigma = pt::fig1_sigma(0.8, -0.5, 1.3, 0.7);
    CHECK(ci_holds(sigma, 0, 1, NodeSet{2}));   // 1 _||_ 2 | 3
    CHECK(!ci_holds(sigma, 0, 2, NodeSet{}));   // sigma_13 = a w != 0
    CHECK(!ci_holds(sigma, 0, 1, NodeSet{}));
}

TEST_CASE("equal variance constraints") {
    Covariance id(Eigen::MatrixXd::Identity(3, 3));
    CHECK(equal_variance_holds(id, 0, NodeSet{}, 1, NodeSet{2}));

    Covariance sigma = pt::fig1_sigma(0.8, -0.5, 1.3, 0.7);
    // omega_11 = omega_22 = w: recover via (pa(1), pa(2)) = ({}, {3})
    CHECK(equal_variance_holds(sigma, 0, NodeSet{}, 1, NodeSet{2}));
    CHECK(!equal_variance_holds(sigma, 0, NodeSet{}, 1, NodeSet{}));
}

TEST_CASE("membership in the partially homoscedastic model") {
    Covariance id(Eigen::MatrixXd::Identity(3, 3));
    const Partition pi = pt::fig1_partition();
    CHECK(is_member(id, pt::fig1_g1(), pi));
    CHECK(is_member(id, pt::fig1_g2(), pi));
    CHECK(is_member(id, Dag(3), Partition::single_block(3)));

    // generic members of the g1 model are not members of the g2 model
    Covariance sigma = pt::fig1_sigma(0.8, -0.5, 1.3, 0.7);
    CHECK(is_member(sigma, pt::fig1_g1(), pi));
    CHECK(!is_member(sigma, pt::fig1_g2(), pi));

    // both graphs accept it under the all-singleton partition
    CHECK(is_member(sigma, pt::fig1_g1(), Partition::singletons(3)));
    CHECK(is_member(sigma, pt::fig1_g2(), Partition::singletons(3)));
}

TEST_CASE("the mirrored model satisfies its own constraint set") {
    // the reversed chain 2 -> 3 -> 1 with weights (c on 2->3, d on 3->1)
    // satisfies sigma_22 sigma_33 = sigma_11 sigma_33 - sigma_13^2
    SemParams params;
    params.lambda = Eigen::MatrixXd::Zero(3, 3);
    params.lambda(1, 2) = 0.7;
    params.lambda(2, 0) = -0.6;
    params.omega = Eigen::VectorXd(3);
    params.omega << 0.9, 0.9, 0.4;
    Covariance sigma = implied_covariance(pt::fig1_g2(), params);
    CHECK(sigma(1, 1) * sigma(2, 2) ==
          doctest::Approx(sigma(0, 0) * sigma(2, 2) - sigma(0, 2) * sigma(0, 2)));
    CHECK(is_member(sigma, pt::fig1_g2(), pt::fig1_partition()));
    CHECK(!is_member(sigma, pt::fig1_g1(), pt::fig1_partition()));
}

TEST_CASE("violating the block constraint breaks membership") {
    std::mt19937_64 rng = make_stream(37, "member");
    int tested = 0;
    for (int rep = 0; rep < 40; ++rep) {
        const int p = 3 + static_cast<int>(rand_index(rng, 3));
        Dag g = random_dag(p, Regime::sparse, rng);
        Partition pi = pt::random_partition(p, rng);
        SemParams params = random_sem(g, pi, rng);
        CHECK(is_member(implied_covariance(g, params), g, pi));

        if (pi.constrained_nodes().empty()) continue;
        ++tested;
        SemParams broken = params;
        const NodeId victim = pi.constrained_nodes().front();
        broken.omega(victim) *= 1.1;
        CHECK(!is_member(implied_covariance(g, broken), g, pi));
    }
    CHECK(tested > 0);
}

TEST_CASE("d-separation transfers to vanishing determinants") {
    std::mt19937_64 rng = make_stream(41, "prop1");
    for (int rep = 0; rep < 12; ++rep) {
        const int p = 3 + static_cast<int>(rand_index(rng, 3));
        Dag g = random_dag(p, Regime::sparse, rng);
        Partition pi = pt::random_partition(p, rng);

        // fifty generic members of the model
        std::vector<Covariance> members;
        for (int k = 0; k < 50; ++k)
            members.push_back(
                implied_covariance(g, random_sem(g, pi, rng)));

        for (NodeId i = 0; i < p; ++i)
            for (NodeId j = i + 1; j < p; ++j) {
                NodeSet rest;
                for (NodeId v = 0; v < p; ++v)
                    if (v != i && v != j) rest.push_back(v);
                for (std::size_t mask = 0;
                     mask < (std::size_t{1} << rest.size()); ++mask) {
                    NodeSet s;
                    for (std::size_t b = 0; b < rest.size(); ++b)
                        if (mask >> b & 1) s.push_back(rest[b]);
                    if (d_separated(g, i, j, s)) {
                        for (const Covariance& sigma : members)
                            CHECK(ci_holds(sigma, i, j, s));
                    } else {
                        // the equal-weight path witness must violate CI
                        bool violated = false;
                        for (double rho : {0.6, 0.37, 0.81}) {
                            Covariance sigma = implied_covariance(
                                g, pt::active_path_witness(g, i, j, s, rho));
                            if (!ci_holds(sigma, i, j, s)) {
                                violated = true;
                                break;
                            }
                        }
                        CHECK(violated);
                    }
                }
            }
    }
}
