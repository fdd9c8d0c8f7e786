#include "phsem/equivalence.hpp"

#include <algorithm>

namespace phsem {

bool markov_equivalent(const Dag& g1, const Dag& g2) {
    if (g1.node_count() != g2.node_count())
        throw DimensionMismatchError("graphs disagree on node count");
    return skeleton(g1) == skeleton(g2) &&
           unshielded_colliders(g1) == unshielded_colliders(g2);
}

bool pi_equivalent(const Dag& g1, const Dag& g2, const Partition& pi) {
    if (pi.node_count() != g1.node_count())
        throw DimensionMismatchError("partition and graph disagree on p");
    if (!markov_equivalent(g1, g2)) return false;
    for (NodeId i : pi.constrained_nodes())
        if (g1.parents(i) != g2.parents(i)) return false;
    return true;
}

namespace {

bool rule_orients(const Pdag& p, MeekRule rule, NodeId u, NodeId v) {
    const int n = p.node_count();
    switch (rule) {
        case MeekRule::R1:
            for (NodeId a = 0; a < n; ++a)
                if (p.has_directed(a, u) && a != v && !p.adjacent(a, v))
                    return true;
            return false;
        case MeekRule::R2:
            for (NodeId w = 0; w < n; ++w)
                if (p.has_directed(u, w) && p.has_directed(w, v)) return true;
            return false;
        case MeekRule::R3:
            for (NodeId x = 0; x < n; ++x) {
                if (!(p.has_undirected(u, x) && p.has_directed(x, v)))
                    continue;
                for (NodeId y = x + 1; y < n; ++y)
                    if (p.has_undirected(u, y) && p.has_directed(y, v) &&
                        !p.adjacent(x, y))
                        return true;
            }
            return false;
        case MeekRule::R4:
            for (NodeId d = 0; d < n; ++d) {
                if (!(p.has_undirected(u, d) && p.has_directed(d, v)))
                    continue;
                for (NodeId c = 0; c < n; ++c)
                    if (c != v && p.has_undirected(u, c) &&
                        p.has_directed(c, d) && !p.adjacent(v, c))
                        return true;
            }
            return false;
    }
    return false;
}

}  // namespace

Pdag apply_meek(const Pdag& pdag, const std::vector<MeekRule>& rules,
                MeekStats* stats) {
    std::vector<MeekRule> enabled = rules;
    std::sort(enabled.begin(), enabled.end());
    enabled.erase(std::unique(enabled.begin(), enabled.end()), enabled.end());

    Pdag work = pdag;
    bool changed = true;
    while (changed) {
        changed = false;
        for (MeekRule rule : enabled) {
            for (const auto& [x, y] : work.undirected_edges()) {
                if (!work.has_undirected(x, y)) continue;  // oriented earlier
                NodeId from = -1, to = -1;
                if (rule_orients(work, rule, x, y)) {
                    from = x;
                    to = y;
                } else if (rule_orients(work, rule, y, x)) {
                    from = y;
                    to = x;
                }
                if (from >= 0) {
                    work.orient(from, to);
                    changed = true;
                    if (stats) ++stats->fired[static_cast<int>(rule) - 1];
                }
            }
        }
    }
    return work;
}

Pdag pattern_with_colliders(const Dag& g) {
    const int p = g.node_count();
    std::vector<std::uint8_t> directed(static_cast<std::size_t>(p) * p, 0);
    for (const auto& [i, j, k] : unshielded_colliders(g)) {
        directed[static_cast<std::size_t>(i) * p + j] = 1;
        directed[static_cast<std::size_t>(k) * p + j] = 1;
    }
    Pdag out(p);
    for (const auto& [i, j] : g.edges()) {
        if (directed[static_cast<std::size_t>(i) * p + j])
            out.add_directed(i, j);
        else
            out.add_undirected(i, j);
    }
    return out;
}

void copy_block_orientations(Pdag& pdag, const Dag& g, const Partition& pi) {
    if (pi.node_count() != g.node_count())
        throw DimensionMismatchError("partition and graph disagree on p");
    for (NodeId i : pi.constrained_nodes()) {
        for (NodeId c : g.children(i)) {
            if (pdag.has_directed(c, i))
                throw InternalInconsistencyError(
                    "copied orientation contradicts a directed edge");
            if (pdag.has_undirected(i, c)) pdag.orient(i, c);
        }
        for (NodeId a : g.parents(i)) {
            if (pdag.has_directed(i, a))
                throw InternalInconsistencyError(
                    "copied orientation contradicts a directed edge");
            if (pdag.has_undirected(a, i)) pdag.orient(a, i);
        }
    }
}

Pdag cpdag(const Dag& g, const Partition& pi) {
    Pdag work = pattern_with_colliders(g);
    work = apply_meek(work, {MeekRule::R1, MeekRule::R2, MeekRule::R3});
    copy_block_orientations(work, g, pi);
    return apply_meek(work, {MeekRule::R1, MeekRule::R2});
}

std::vector<Dag> enumerate_pi_class(const Dag& g, const Partition& pi,
                                    std::size_t budget) {
    const std::vector<NodePair> sk = skeleton(g);
    const std::size_t m = sk.size();
    if (m >= 63 || (std::size_t{1} << m) > budget)
        throw BudgetExceededError("too many skeleton orientations");

    std::vector<Dag> out;
    std::vector<Edge> edges(m);
    for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
        for (std::size_t b = 0; b < m; ++b)
            edges[b] = (mask >> b) & 1 ? Edge{sk[b].second, sk[b].first}
                                       : Edge{sk[b].first, sk[b].second};
        try {
            Dag candidate(g.node_count(), edges);
            if (pi_equivalent(g, candidate, pi))
                out.push_back(std::move(candidate));
        } catch (const CyclicGraphError&) {
        }
    }
    return out;
}

Pdag class_union(const std::vector<Dag>& dags) {
    if (dags.empty()) throw Error("class_union needs at least one DAG");
    Pdag out(dags.front().node_count());
    for (const auto& [i, j] : skeleton(dags.front())) {
        bool forward = false, backward = false;
        for (const Dag& g : dags) {
            if (g.has_edge(i, j)) forward = true;
            if (g.has_edge(j, i)) backward = true;
        }
        if (forward && backward)
            out.add_undirected(i, j);
        else if (forward)
            out.add_directed(i, j);
        else
            out.add_directed(j, i);
    }
    return out;
}

}  // namespace phsem
