#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "oracles.hpp"
#include "phsem/equivalence.hpp"
#include "phsem/random.hpp"
#include "phsem/random_models.hpp"

using namespace phsem;
namespace pt = phsem::testing;

namespace {

// Meek closure with a randomized application order; used to check that the
// fixed-order closure is order-independent.
Pdag apply_meek_shuffled(Pdag work, const std::vector<MeekRule>& rules,
                         std::mt19937_64& rng) {
    // The patterns are re-implemented here so the shuffled closure stays
    // independent of the library's scan logic.
    auto orients = [&](MeekRule rule, NodeId u, NodeId v) {
        const int n = work.node_count();
        switch (rule) {
            case MeekRule::R1:
                for (NodeId a = 0; a < n; ++a)
                    if (work.has_directed(a, u) && a != v &&
                        !work.adjacent(a, v))
                        return true;
                return false;
            case MeekRule::R2:
                for (NodeId w = 0; w < n; ++w)
                    if (work.has_directed(u, w) && work.has_directed(w, v))
                        return true;
                return false;
            case MeekRule::R3:
                for (NodeId x = 0; x < n; ++x)
                    for (NodeId y = 0; y < n; ++y)
                        if (x != y && work.has_undirected(u, x) &&
                            work.has_undirected(u, y) &&
                            work.has_directed(x, v) &&
                            work.has_directed(y, v) && !work.adjacent(x, y))
                            return true;
                return false;
            case MeekRule::R4:
                for (NodeId c = 0; c < n; ++c)
                    for (NodeId d = 0; d < n; ++d)
                        if (c != d && c != v && work.has_undirected(u, c) &&
                            work.has_undirected(u, d) &&
                            work.has_directed(c, d) &&
                            work.has_directed(d, v) && !work.adjacent(v, c))
                            return true;
                return false;
        }
        return false;
    };

    while (true) {
        std::vector<std::tuple<MeekRule, NodeId, NodeId>> applicable;
        for (MeekRule rule : rules)
            for (const auto& [x, y] : work.undirected_edges()) {
                if (orients(rule, x, y)) applicable.emplace_back(rule, x, y);
                if (orients(rule, y, x)) applicable.emplace_back(rule, y, x);
            }
        if (applicable.empty()) break;
        const auto& [rule, u, v] =
            applicable[rand_index(rng, applicable.size())];
        work.orient(u, v);
    }
    return work;
}

Dag relabel(const Dag& g, const std::vector<int>& perm) {
    std::vector<Edge> edges;
    for (const auto& [i, j] : g.edges()) edges.emplace_back(perm[i], perm[j]);
    return Dag(g.node_count(), edges);
}

}  // namespace

TEST_CASE("markov equivalence") {
    CHECK(markov_equivalent(pt::fig1_g1(), pt::fig1_g2()));
    CHECK(!markov_equivalent(Dag(3, {{0, 1}, {1, 2}}),
                             Dag(3, {{0, 1}, {2, 1}})));
    Dag g = pt::fig3_dag();
    CHECK(markov_equivalent(g, g));
    CHECK_THROWS_AS(markov_equivalent(Dag(2), Dag(3)),
                    DimensionMismatchError);
}

TEST_CASE("pi equivalence") {
    const Partition pi = pt::fig1_partition();
    CHECK(!pi_equivalent(pt::fig1_g1(), pt::fig1_g2(), pi));
    CHECK(pi_equivalent(pt::fig1_g1(), pt::fig1_g2(),
                        Partition::singletons(3)));
    CHECK(pi_equivalent(pt::fig1_g1(), pt::fig1_g1(), pi));
    CHECK(pi_equivalent(pt::fig3_dag(), pt::fig3_dag(),
                        pt::fig3_partition()));
}

TEST_CASE("pi equivalence is an equivalence relation at p=3") {
    const std::vector<Dag> dags = pt::all_dags(3);
    for (const std::vector<int>& block_of : pt::all_partitions(3)) {
        const Partition pi(block_of);
        std::vector<std::vector<bool>> eq(dags.size(),
                                          std::vector<bool>(dags.size()));
        for (std::size_t a = 0; a < dags.size(); ++a)
            for (std::size_t b = 0; b < dags.size(); ++b)
                eq[a][b] = pi_equivalent(dags[a], dags[b], pi);
        for (std::size_t a = 0; a < dags.size(); ++a) {
            CHECK(eq[a][a]);
            for (std::size_t b = 0; b < dags.size(); ++b) {
                CHECK(eq[a][b] == eq[b][a]);
                if (!eq[a][b]) continue;
                for (std::size_t c = 0; c < dags.size(); ++c)
                    if (eq[b][c]) CHECK(eq[a][c]);
            }
        }
    }
}

TEST_CASE("meek rule patterns orient as drawn") {
    SUBCASE("R1") {
        Pdag p(3);
        p.add_directed(0, 1);
        p.add_undirected(1, 2);
        Pdag closed = apply_meek(p, {MeekRule::R1});
        CHECK(closed.has_directed(1, 2));
    }
    SUBCASE("R1 shielded does not fire") {
        Pdag p(3);
        p.add_directed(0, 1);
        p.add_undirected(1, 2);
        p.add_undirected(0, 2);
        Pdag closed = apply_meek(p, {MeekRule::R1});
        CHECK(closed.has_undirected(1, 2));
    }
    SUBCASE("R2") {
        Pdag p(3);
        p.add_directed(0, 1);
        p.add_directed(1, 2);
        p.add_undirected(0, 2);
        Pdag closed = apply_meek(p, {MeekRule::R2});
        CHECK(closed.has_directed(0, 2));
    }
    SUBCASE("R3") {
        Pdag p(4);
        p.add_undirected(0, 1);
        p.add_undirected(0, 2);
        p.add_undirected(0, 3);
        p.add_directed(1, 3);
        p.add_directed(2, 3);
        Pdag closed = apply_meek(p, {MeekRule::R3});
        CHECK(closed.has_directed(0, 3));
        CHECK(closed.has_undirected(0, 1));
        CHECK(closed.has_undirected(0, 2));
    }
    SUBCASE("R3 needs the two parents non-adjacent") {
        Pdag p(4);
        p.add_undirected(0, 1);
        p.add_undirected(0, 2);
        p.add_undirected(0, 3);
        p.add_directed(1, 3);
        p.add_directed(2, 3);
        p.add_directed(1, 2);
        Pdag closed = apply_meek(p, {MeekRule::R3});
        CHECK(closed.has_undirected(0, 3));
    }
    SUBCASE("R4") {
        Pdag p(4);
        p.add_undirected(0, 1);
        p.add_undirected(0, 2);
        p.add_undirected(0, 3);
        p.add_directed(2, 3);
        p.add_directed(3, 1);
        Pdag closed = apply_meek(p, {MeekRule::R4});
        CHECK(closed.has_directed(0, 1));
        CHECK(closed.has_undirected(0, 2));
    }
    SUBCASE("fully directed input is unchanged") {
        Pdag p = Pdag::from_dag(pt::fig3_dag());
        CHECK(apply_meek(p, {MeekRule::R1, MeekRule::R2, MeekRule::R3,
                             MeekRule::R4}) == p);
    }
    SUBCASE("disabled rules do not fire") {
        Pdag p(3);
        p.add_directed(0, 1);
        p.add_undirected(1, 2);
        CHECK(apply_meek(p, {MeekRule::R2}) == p);
    }
}

TEST_CASE("meek closure is order independent") {
    std::mt19937_64 rng = make_stream(43, "meek-order");
    const std::vector<MeekRule> all{MeekRule::R1, MeekRule::R2, MeekRule::R3,
                                    MeekRule::R4};
    for (int rep = 0; rep < 60; ++rep) {
        const int p = 4 + static_cast<int>(rand_index(rng, 3));
        Dag g = random_dag_gnp(p, 0.4, rng);
        Pdag start = pattern_with_colliders(g);
        Pdag canonical = apply_meek(start, all);
        for (int shuffle = 0; shuffle < 3; ++shuffle)
            CHECK(apply_meek_shuffled(start, all, rng) == canonical);
    }
}

TEST_CASE("cpdag reproduces the six-node example") {
    Pdag result = cpdag(pt::fig3_dag(), pt::fig3_partition());
    CHECK(result.has_directed(0, 1));
    CHECK(result.has_directed(0, 2));
    CHECK(result.has_directed(1, 2));
    CHECK(result.has_directed(0, 4));
    CHECK(result.has_directed(1, 4));
    CHECK(result.has_directed(1, 5));
    CHECK(result.has_directed(5, 3));  // forced by R1
    CHECK(result.has_undirected(2, 4));
    CHECK(result.edge_count() == 8);
}

TEST_CASE("cpdag under the single-block partition is the DAG itself") {
    std::mt19937_64 rng = make_stream(47, "cpdag-max");
    for (int rep = 0; rep < 30; ++rep) {
        const int p = 3 + static_cast<int>(rand_index(rng, 4));
        Dag g = random_dag(p, Regime::sparse, rng);
        Pdag result = cpdag(g, Partition::single_block(p));
        CHECK(result == Pdag::from_dag(g));
    }
}

TEST_CASE("cpdag of a single edge under singletons is undirected") {
    Pdag result = cpdag(Dag(2, {{0, 1}}), Partition::singletons(2));
    CHECK(result.has_undirected(0, 1));
}

TEST_CASE("enumerate_pi_class on known cases") {
    auto cls = enumerate_pi_class(Dag(2, {{0, 1}}), Partition::singletons(2));
    CHECK(cls.size() == 2);

    cls = enumerate_pi_class(pt::fig3_dag(), pt::fig3_partition());
    CHECK(cls.size() == 2);  // only edge 3 - 5 flips

    std::mt19937_64 rng = make_stream(53, "class-max");
    for (int rep = 0; rep < 10; ++rep) {
        Dag g = random_dag(5, Regime::sparse, rng);
        auto singleton = enumerate_pi_class(g, Partition::single_block(5));
        REQUIRE(singleton.size() == 1);
        CHECK(singleton.front() == g);
    }

    CHECK_THROWS_AS(
        enumerate_pi_class(pt::fig3_dag(), pt::fig3_partition(), 4),
        BudgetExceededError);
}

TEST_CASE("cpdag equals the class union exhaustively at p=3") {
    const std::vector<Dag> dags = pt::all_dags(3);
    for (const std::vector<int>& block_of : pt::all_partitions(3)) {
        const Partition pi(block_of);
        for (const Dag& g : dags) {
            const std::vector<Dag> cls = enumerate_pi_class(g, pi);
            CHECK(cpdag(g, pi) == class_union(cls));
            // the representation is canonical across the class
            for (const Dag& member : cls)
                CHECK(cpdag(member, pi) == cpdag(g, pi));
        }
    }
}

TEST_CASE("cpdag equals the class union on random larger graphs") {
    std::mt19937_64 rng = make_stream(59, "class-rand");
    int done = 0;
    while (done < 200) {
        const int p = 5 + static_cast<int>(rand_index(rng, 2));
        Dag g = random_dag(p, Regime::sparse, rng);
        if (g.edge_count() > 14) continue;
        Partition pi = pt::random_partition(p, rng);
        CHECK(cpdag(g, pi) == class_union(enumerate_pi_class(g, pi)));
        ++done;
    }
}

TEST_CASE("cpdag under singletons matches the classical CPDAG") {
    for (int p = 2; p <= 4; ++p) {
        const std::vector<Dag> dags = pt::all_dags(p);
        const Partition pi_min = Partition::singletons(p);
        for (const Dag& g : dags) {
            // classical CPDAG: union over the whole Markov class, scanning
            // every DAG on p nodes
            std::vector<Dag> markov_class;
            for (const Dag& cand : dags)
                if (markov_equivalent(g, cand)) markov_class.push_back(cand);
            CHECK(cpdag(g, pi_min) == class_union(markov_class));
        }
    }
}

TEST_CASE("coarser partitions only add directed edges") {
    std::mt19937_64 rng = make_stream(61, "refine");
    for (int rep = 0; rep < 100; ++rep) {
        const int p = 4 + static_cast<int>(rand_index(rng, 4));
        Dag g = random_dag(p, Regime::sparse, rng);
        Partition finer = pt::random_partition(p, rng);
        if (finer.block_count() < 2) continue;

        // merge two blocks to get a coarser partition
        std::vector<int> block_of(p);
        const int merge_from = static_cast<int>(
            rand_index(rng, finer.block_count()));
        int merge_to = static_cast<int>(
            rand_index(rng, finer.block_count() - 1));
        if (merge_to >= merge_from) ++merge_to;
        for (NodeId v = 0; v < p; ++v) {
            int b = finer.block_of(v);
            if (b == merge_from) b = merge_to;
            if (b > merge_from) --b;
            block_of[v] = b;
        }
        const Partition coarser(block_of);

        const auto finer_directed = cpdag(g, finer).directed_edges();
        const auto coarser_directed = cpdag(g, coarser).directed_edges();
        CHECK(std::includes(coarser_directed.begin(), coarser_directed.end(),
                            finer_directed.begin(), finer_directed.end()));
    }
}

TEST_CASE("final closure never needs R3 or R4") {
    std::mt19937_64 rng = make_stream(67, "phase4");
    for (int rep = 0; rep < 100; ++rep) {
        const int p = 3 + static_cast<int>(rand_index(rng, 5));
        Dag g = rep % 2 == 0 ? random_dag(p, Regime::sparse, rng)
                             : random_dag(p, Regime::dense, rng);
        Partition pi = pt::random_partition(p, rng);

        Pdag phase3 = apply_meek(pattern_with_colliders(g),
                                 {MeekRule::R1, MeekRule::R2, MeekRule::R3});
        copy_block_orientations(phase3, g, pi);

        MeekStats stats;
        Pdag with_all = apply_meek(phase3,
                                   {MeekRule::R1, MeekRule::R2, MeekRule::R3,
                                    MeekRule::R4},
                                   &stats);
        Pdag with_two = apply_meek(phase3, {MeekRule::R1, MeekRule::R2});
        CHECK(with_all == with_two);
        CHECK(stats.fired[2] == 0);
        CHECK(stats.fired[3] == 0);
        CHECK(with_two == cpdag(g, pi));
    }
}

TEST_CASE("equivalent DAGs pass each other's membership test") {
    std::mt19937_64 rng = make_stream(71, "model-oracle");
    int checked_equivalent = 0, checked_distinct = 0;
    const std::vector<Dag> dags = pt::all_dags(3);
    while (checked_equivalent < 8 || checked_distinct < 8) {
        const Dag& g1 = dags[rand_index(rng, dags.size())];
        const Dag& g2 = dags[rand_index(rng, dags.size())];
        if (skeleton(g1) != skeleton(g2)) continue;
        Partition pi = pt::random_partition(3, rng);
        const bool equivalent = pi_equivalent(g1, g2, pi);

        bool all_pass = true;
        for (int k = 0; k < 100 && all_pass; ++k) {
            Covariance s1 = implied_covariance(g1, random_sem(g1, pi, rng));
            Covariance s2 = implied_covariance(g2, random_sem(g2, pi, rng));
            all_pass = is_member(s1, g2, pi) && is_member(s2, g1, pi);
        }
        CHECK(all_pass == equivalent);
        (equivalent ? checked_equivalent : checked_distinct)++;
    }
}

TEST_CASE("copy_block_orientations rejects contradictions") {
    // an artificial pdag directed against the DAG must trip the guard
    Dag g(2, {{0, 1}});
    Pdag bad(2);
    bad.add_directed(1, 0);
    CHECK_THROWS_AS(
        copy_block_orientations(bad, g, Partition::single_block(2)),
        InternalInconsistencyError);
}

TEST_CASE("relabeling commutes with cpdag construction") {
    std::mt19937_64 rng = make_stream(73, "relabel");
    for (int rep = 0; rep < 30; ++rep) {
        const int p = 5;
        Dag g = random_dag(p, Regime::sparse, rng);
        Partition pi = pt::random_partition(p, rng);
        std::vector<int> perm = rand_permutation(rng, p);

        std::vector<int> block_of(p);
        for (NodeId v = 0; v < p; ++v) block_of[perm[v]] = pi.block_of(v);
        Partition pi_perm(block_of);

        Pdag direct = cpdag(relabel(g, perm), pi_perm);
        Pdag mapped(p);
        for (const auto& [i, j] : cpdag(g, pi).directed_edges())
            mapped.add_directed(perm[i], perm[j]);
        for (const auto& [i, j] : cpdag(g, pi).undirected_edges())
            mapped.add_undirected(perm[i], perm[j]);
        CHECK(direct == mapped);
    }
}
