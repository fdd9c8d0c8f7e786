#include "phsem/graph.hpp"

#include <algorithm>
#include <deque>
#include <queue>

namespace phsem {

std::vector<NodeId> topological_order(int p, const std::vector<Edge>& edges) {
    std::vector<int> indegree(p, 0);
    std::vector<std::vector<NodeId>> out(p);
    for (const auto& [i, j] : edges) {
        out[i].push_back(j);
        ++indegree[j];
    }
    // Kahn's algorithm with a min-queue so the order is canonical.
    std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
    for (NodeId v = 0; v < p; ++v)
        if (indegree[v] == 0) ready.push(v);
    std::vector<NodeId> order;
    order.reserve(p);
    while (!ready.empty()) {
        NodeId v = ready.top();
        ready.pop();
        order.push_back(v);
        for (NodeId c : out[v])
            if (--indegree[c] == 0) ready.push(c);
    }
    if (static_cast<int>(order.size()) != p)
        throw CyclicGraphError("edge set admits no topological order");
    return order;
}

Dag::Dag(int p, std::vector<Edge> edges) : p_(p) {
    if (p < 1) throw Error("node count must be >= 1");
    adj_.assign(static_cast<std::size_t>(p) * p, 0);
    parents_.resize(p);
    children_.resize(p);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    for (const auto& [i, j] : edges) {
        check_node(i);
        check_node(j);
        if (i == j) throw Error("self-loop not allowed");
        if (adj_[static_cast<std::size_t>(j) * p_ + i])
            throw CyclicGraphError("pair present in both orientations");
        adj_[static_cast<std::size_t>(i) * p_ + j] = 1;
        parents_[j].push_back(i);
        children_[i].push_back(j);
    }
    edges_ = std::move(edges);
    topo_ = topological_order(p_, edges_);
    // parents_/children_ are sorted because edges_ was.
    for (auto& v : parents_) std::sort(v.begin(), v.end());
}

namespace {

NodeSet closure(const Dag& g, NodeId start, bool forward, bool include_start) {
    const int p = g.node_count();
    std::vector<std::uint8_t> seen(p, 0);
    std::deque<NodeId> frontier{start};
    seen[start] = 1;
    while (!frontier.empty()) {
        NodeId v = frontier.front();
        frontier.pop_front();
        const NodeSet& next = forward ? g.children(v) : g.parents(v);
        for (NodeId u : next)
            if (!seen[u]) {
                seen[u] = 1;
                frontier.push_back(u);
            }
    }
    NodeSet out;
    for (NodeId v = 0; v < p; ++v)
        if (seen[v] && (include_start || v != start)) out.push_back(v);
    return out;
}

}  // namespace

NodeSet ancestors(const Dag& g, NodeId i) {
    g.check_node(i);
    return closure(g, i, /*forward=*/false, /*include_start=*/false);
}

NodeSet descendants(const Dag& g, NodeId i) {
    g.check_node(i);
    return closure(g, i, /*forward=*/true, /*include_start=*/true);
}

Relatives relatives(const Dag& g, NodeId i) {
    g.check_node(i);
    return Relatives{g.parents(i), g.children(i), ancestors(g, i),
                     descendants(g, i)};
}

std::vector<NodePair> skeleton(const Dag& g) {
    std::vector<NodePair> out;
    out.reserve(g.edge_count());
    for (const auto& [i, j] : g.edges()) out.push_back(make_node_pair(i, j));
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::tuple<NodeId, NodeId, NodeId>> unshielded_colliders(
    const Dag& g) {
    std::vector<std::tuple<NodeId, NodeId, NodeId>> out;
    for (NodeId j = 0; j < g.node_count(); ++j) {
        const NodeSet& pa = g.parents(j);
        for (std::size_t a = 0; a < pa.size(); ++a)
            for (std::size_t b = a + 1; b < pa.size(); ++b)
                if (!g.adjacent(pa[a], pa[b]))
                    out.emplace_back(pa[a], j, pa[b]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool d_separated(const Dag& g, NodeId i, NodeId j, std::span<const NodeId> s) {
    const int p = g.node_count();
    g.check_node(i);
    g.check_node(j);
    if (i == j) throw Error("d_separated requires distinct endpoints");

    std::vector<std::uint8_t> in_s(p, 0);
    for (NodeId v : s) {
        g.check_node(v);
        if (v == i || v == j)
            throw Error("conditioning set must not contain the endpoints");
        in_s[v] = 1;
    }

    // A collider m keeps a path active iff m is in s or has a descendant in
    // s, i.e. m is in s or an ancestor of s.
    std::vector<std::uint8_t> collider_ok(p, 0);
    {
        std::deque<NodeId> frontier;
        for (NodeId v = 0; v < p; ++v)
            if (in_s[v]) {
                collider_ok[v] = 1;
                frontier.push_back(v);
            }
        while (!frontier.empty()) {
            NodeId v = frontier.front();
            frontier.pop_front();
            for (NodeId u : g.parents(v))
                if (!collider_ok[u]) {
                    collider_ok[u] = 1;
                    frontier.push_back(u);
                }
        }
    }

    // States (node, arrived-via). via_in: we entered along an edge into the
    // node; via_out: along an edge out of it. From the start node both exit
    // kinds are allowed.
    enum : int { via_in = 0, via_out = 1 };
    std::vector<std::uint8_t> visited(static_cast<std::size_t>(p) * 2, 0);
    std::deque<std::pair<NodeId, int>> frontier;
    auto try_visit = [&](NodeId v, int dir) {
        if (v == j) return true;
        std::size_t key = static_cast<std::size_t>(v) * 2 + dir;
        if (!visited[key]) {
            visited[key] = 1;
            frontier.emplace_back(v, dir);
        }
        return false;
    };

    for (NodeId c : g.children(i))
        if (try_visit(c, via_in)) return false;
    for (NodeId a : g.parents(i))
        if (try_visit(a, via_out)) return false;

    while (!frontier.empty()) {
        auto [v, dir] = frontier.front();
        frontier.pop_front();
        if (dir == via_in) {
            // Chain v -> child needs v as non-collider; step to a parent
            // makes v a collider.
            if (!in_s[v])
                for (NodeId c : g.children(v))
                    if (try_visit(c, via_in)) return false;
            if (collider_ok[v])
                for (NodeId a : g.parents(v))
                    if (try_visit(a, via_out)) return false;
        } else {
            // Fork or chain through v; v must be a non-collider.
            if (!in_s[v]) {
                for (NodeId c : g.children(v))
                    if (try_visit(c, via_in)) return false;
                for (NodeId a : g.parents(v))
                    if (try_visit(a, via_out)) return false;
            }
        }
    }
    return true;
}

namespace {

// All directed paths from t to target, top-first. `reach[v]` marks nodes
// that can reach the target, used to prune the DFS.
void collect_paths(const Dag& g, NodeId v, NodeId target,
                   const std::vector<std::uint8_t>& reach,
                   std::vector<NodeId>& stack,
                   std::vector<std::vector<NodeId>>& out) {
    stack.push_back(v);
    if (v == target) {
        out.push_back(stack);
    } else {
        for (NodeId c : g.children(v))
            if (reach[c]) collect_paths(g, c, target, reach, stack, out);
    }
    stack.pop_back();
}

// Nodes with a directed path to target (target included).
std::vector<std::uint8_t> reaches(const Dag& g, NodeId target) {
    std::vector<std::uint8_t> reach(g.node_count(), 0);
    reach[target] = 1;
    for (NodeId v : ancestors(g, target)) reach[v] = 1;
    return reach;
}

}  // namespace

std::vector<Trek> enumerate_treks(const Dag& g, NodeId i, NodeId j,
                                  std::size_t budget) {
    g.check_node(i);
    g.check_node(j);
    const int p = g.node_count();

    // Count paths into i and j per source node to bound the trek count
    // before materializing anything.
    auto path_counts = [&](NodeId target) {
        std::vector<double> n(p, 0.0);
        n[target] = 1.0;
        const auto& order = g.topo();
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            NodeId v = *it;
            if (v == target) continue;
            double total = 0.0;
            for (NodeId c : g.children(v)) total += n[c];
            n[v] = total;
        }
        return n;
    };
    const std::vector<double> count_i = path_counts(i);
    const std::vector<double> count_j = path_counts(j);
    double total = 0.0;
    for (NodeId t = 0; t < p; ++t) total += count_i[t] * count_j[t];
    if (total > static_cast<double>(budget))
        throw BudgetExceededError("trek count exceeds budget");

    const std::vector<std::uint8_t> reach_i = reaches(g, i);
    const std::vector<std::uint8_t> reach_j = reaches(g, j);

    std::vector<Trek> treks;
    std::vector<NodeId> stack;
    for (NodeId t = 0; t < p; ++t) {
        if (count_i[t] == 0.0 || count_j[t] == 0.0) continue;
        std::vector<std::vector<NodeId>> left_paths, right_paths;
        collect_paths(g, t, i, reach_i, stack, left_paths);
        collect_paths(g, t, j, reach_j, stack, right_paths);
        for (const auto& l : left_paths)
            for (const auto& r : right_paths) treks.push_back(Trek{l, r});
    }
    std::sort(treks.begin(), treks.end());
    return treks;
}

Partition::Partition(std::vector<int> block_of) : block_of_(std::move(block_of)) {
    const int p = static_cast<int>(block_of_.size());
    if (p < 1) throw Error("partition must cover at least one node");
    for (int b : block_of_) {
        if (b < 0) throw Error("negative block index");
        k_ = std::max(k_, b + 1);
    }
    sizes_.assign(k_, 0);
    blocks_.assign(k_, {});
    for (NodeId v = 0; v < p; ++v) {
        ++sizes_[block_of_[v]];
        blocks_[block_of_[v]].push_back(v);
    }
    for (int k = 0; k < k_; ++k)
        if (sizes_[k] == 0) throw Error("empty partition block");
    for (NodeId v = 0; v < p; ++v)
        if (sizes_[block_of_[v]] >= 2) constrained_.push_back(v);
}

Partition Partition::singletons(int p) {
    std::vector<int> ids(p);
    for (int v = 0; v < p; ++v) ids[v] = v;
    return Partition(std::move(ids));
}

Partition Partition::single_block(int p) {
    return Partition(std::vector<int>(p, 0));
}

Partition Partition::from_blocks(int p, const std::vector<NodeSet>& blocks) {
    std::vector<int> ids(p, -1);
    for (std::size_t k = 0; k < blocks.size(); ++k)
        for (NodeId v : blocks[k]) {
            if (v < 0 || v >= p) throw Error("partition node out of range");
            if (ids[v] != -1) throw Error("node assigned to two blocks");
            ids[v] = static_cast<int>(k);
        }
    for (NodeId v = 0; v < p; ++v)
        if (ids[v] == -1) throw Error("node missing from partition");
    return Partition(std::move(ids));
}

Pdag::Pdag(int p) : p_(p) {
    if (p < 1) throw Error("node count must be >= 1");
    marks_.assign(static_cast<std::size_t>(p) * p, 0);
}

Pdag::Pdag(int p, const std::vector<Edge>& directed,
           const std::vector<NodePair>& undirected)
    : Pdag(p) {
    for (const auto& [i, j] : directed) add_directed(i, j);
    for (const auto& [i, j] : undirected) add_undirected(i, j);
}

Pdag Pdag::from_dag(const Dag& g) {
    Pdag out(g.node_count());
    for (const auto& [i, j] : g.edges()) out.add_directed(i, j);
    return out;
}

void Pdag::add_directed(NodeId i, NodeId j) {
    check_node(i);
    check_node(j);
    if (i == j) throw Error("self-loop not allowed");
    if (mark(i, j) != 0) throw Error("edge already present");
    mark_ref(i, j) = 1;
    mark_ref(j, i) = -1;
    ++n_edges_;
}

void Pdag::add_undirected(NodeId i, NodeId j) {
    check_node(i);
    check_node(j);
    if (i == j) throw Error("self-loop not allowed");
    if (mark(i, j) != 0) throw Error("edge already present");
    mark_ref(i, j) = 2;
    mark_ref(j, i) = 2;
    ++n_edges_;
}

void Pdag::orient(NodeId i, NodeId j) {
    if (mark(i, j) != 2) throw Error("orient requires an undirected edge");
    mark_ref(i, j) = 1;
    mark_ref(j, i) = -1;
}

std::vector<Edge> Pdag::directed_edges() const {
    std::vector<Edge> out;
    for (NodeId i = 0; i < p_; ++i)
        for (NodeId j = 0; j < p_; ++j)
            if (mark(i, j) == 1) out.emplace_back(i, j);
    return out;
}

std::vector<NodePair> Pdag::undirected_edges() const {
    std::vector<NodePair> out;
    for (NodeId i = 0; i < p_; ++i)
        for (NodeId j = i + 1; j < p_; ++j)
            if (mark(i, j) == 2) out.emplace_back(i, j);
    return out;
}

std::vector<NodePair> Pdag::skeleton() const {
    std::vector<NodePair> out;
    for (NodeId i = 0; i < p_; ++i)
        for (NodeId j = i + 1; j < p_; ++j)
            if (mark(i, j) != 0) out.emplace_back(i, j);
    return out;
}

bool Pdag::fully_directed() const {
    for (NodeId i = 0; i < p_; ++i)
        for (NodeId j = i + 1; j < p_; ++j)
            if (mark(i, j) == 2) return false;
    return true;
}

NodeSet Pdag::neighbors(NodeId i) const {
    NodeSet out;
    for (NodeId j = 0; j < p_; ++j)
        if (j != i && mark(i, j) != 0) out.push_back(j);
    return out;
}

namespace setops {

bool contains(const NodeSet& s, NodeId x) {
    return std::binary_search(s.begin(), s.end(), x);
}

bool is_subset(const NodeSet& a, const NodeSet& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

NodeSet set_union(const NodeSet& a, const NodeSet& b) {
    NodeSet out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                   std::back_inserter(out));
    return out;
}

NodeSet set_minus(const NodeSet& a, const NodeSet& b) {
    NodeSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
    return out;
}

NodeSet complement(int p, const NodeSet& a) {
    NodeSet out;
    NodeSet all(p);
    for (NodeId v = 0; v < p; ++v) all[v] = v;
    std::set_difference(all.begin(), all.end(), a.begin(), a.end(),
                        std::back_inserter(out));
    return out;
}

}  // namespace setops

}  // namespace phsem
