#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "phsem/errors.hpp"

namespace phsem {

// Nodes are dense integers in [0, p); external names are mapped at the CLI
// boundary so that all core structures stay array-indexed.
using NodeId = int;

// Ordered pair (i, j) encoding the edge i -> j.
using Edge = std::pair<NodeId, NodeId>;

// Unordered pair, stored with first < second.
using NodePair = std::pair<NodeId, NodeId>;

// Sorted, duplicate-free node set.
using NodeSet = std::vector<NodeId>;

inline NodePair make_node_pair(NodeId a, NodeId b) {
    return a < b ? NodePair{a, b} : NodePair{b, a};
}

// Directed acyclic graph over nodes 0..p-1. Immutable after construction;
// acyclicity is checked by the constructor, which also caches a topological
// order.
class Dag {
public:
    explicit Dag(int p) : Dag(p, {}) {}
    Dag(int p, std::vector<Edge> edges);

    int node_count() const { return p_; }
    std::size_t edge_count() const { return edges_.size(); }

    // Edges sorted lexicographically; canonical across equal graphs.
    const std::vector<Edge>& edges() const { return edges_; }

    bool has_edge(NodeId i, NodeId j) const {
        check_node(i);
        check_node(j);
        return adj_[static_cast<std::size_t>(i) * p_ + j] != 0;
    }
    bool adjacent(NodeId i, NodeId j) const {
        return has_edge(i, j) || has_edge(j, i);
    }

    const NodeSet& parents(NodeId i) const {
        check_node(i);
        return parents_[i];
    }
    const NodeSet& children(NodeId i) const {
        check_node(i);
        return children_[i];
    }

    friend bool operator==(const Dag& a, const Dag& b) {
        return a.p_ == b.p_ && a.edges_ == b.edges_;
    }

    void check_node(NodeId i) const {
        if (i < 0 || i >= p_) throw Error("node id out of range");
    }

    // Cached order; every edge goes from an earlier to a later position.
    const std::vector<NodeId>& topo() const { return topo_; }

private:
    int p_ = 0;
    std::vector<Edge> edges_;
    std::vector<NodeSet> parents_;
    std::vector<NodeSet> children_;
    std::vector<std::uint8_t> adj_;
    std::vector<NodeId> topo_;
};

// Topological order of g; throws CyclicGraphError if none exists (free
// function form also used internally by the Dag constructor).
std::vector<NodeId> topological_order(int p, const std::vector<Edge>& edges);
inline std::vector<NodeId> topological_order(const Dag& g) { return g.topo(); }

struct Relatives {
    NodeSet parents;
    NodeSet children;
    NodeSet ancestors;    // excludes i
    NodeSet descendants;  // includes i
};

Relatives relatives(const Dag& g, NodeId i);
NodeSet ancestors(const Dag& g, NodeId i);
NodeSet descendants(const Dag& g, NodeId i);

// Unordered adjacencies of g, sorted.
std::vector<NodePair> skeleton(const Dag& g);

// All triples i -> j <- k with i < k and i, k non-adjacent, sorted.
std::vector<std::tuple<NodeId, NodeId, NodeId>> unshielded_colliders(
    const Dag& g);

// True iff every path between i and j is blocked by s. Linear-time
// reachability over (node, arrival-direction) states; equivalent to path
// enumeration (the enumeration oracle lives in the test suite).
bool d_separated(const Dag& g, NodeId i, NodeId j, std::span<const NodeId> s);

// A collider-free path: two directed paths out of a common top node. Both
// sides are stored top-first and may share nodes and edges.
struct Trek {
    std::vector<NodeId> left;   // top, ..., i
    std::vector<NodeId> right;  // top, ..., j

    NodeId top() const { return left.front(); }
    auto operator<=>(const Trek&) const = default;
};

// The complete set of treks between i and j (i == j allowed), sorted.
// Intended as a small-graph oracle; throws BudgetExceededError when the
// trek count surpasses the budget.
std::vector<Trek> enumerate_treks(const Dag& g, NodeId i, NodeId j,
                                  std::size_t budget = 1000000);

// Partition of 0..p-1 into K non-empty blocks; nodes in one block share an
// error variance.
class Partition {
public:
    // block_of[i] = block index of node i; blocks 0..K-1 must all be hit.
    explicit Partition(std::vector<int> block_of);

    static Partition singletons(int p);    // finest: every node its own block
    static Partition single_block(int p);  // coarsest: one block
    static Partition from_blocks(int p, const std::vector<NodeSet>& blocks);

    int node_count() const { return static_cast<int>(block_of_.size()); }
    int block_count() const { return k_; }
    int block_of(NodeId i) const { return block_of_[i]; }
    bool same_block(NodeId i, NodeId j) const {
        return block_of_[i] == block_of_[j];
    }
    int block_size(int k) const { return sizes_[k]; }
    const std::vector<NodeSet>& blocks() const { return blocks_; }

    // Nodes whose block has size >= 2 (the ones with identified parent sets).
    const NodeSet& constrained_nodes() const { return constrained_; }

    friend bool operator==(const Partition& a, const Partition& b) {
        return a.block_of_ == b.block_of_;
    }

private:
    std::vector<int> block_of_;
    std::vector<int> sizes_;
    std::vector<NodeSet> blocks_;
    NodeSet constrained_;
    int k_ = 0;
};

// Mixed graph with directed and undirected edges (CPDAG representation).
// Edge sets are disjoint on unordered skeletons; no self-loops.
class Pdag {
public:
    explicit Pdag(int p);
    Pdag(int p, const std::vector<Edge>& directed,
         const std::vector<NodePair>& undirected);
    static Pdag from_dag(const Dag& g);

    int node_count() const { return p_; }
    bool has_directed(NodeId i, NodeId j) const {
        return mark(i, j) == 1;
    }
    bool has_undirected(NodeId i, NodeId j) const {
        return mark(i, j) == 2;
    }
    bool adjacent(NodeId i, NodeId j) const { return mark(i, j) != 0; }

    void add_directed(NodeId i, NodeId j);
    void add_undirected(NodeId i, NodeId j);

    // Turns the undirected edge i - j into i -> j.
    void orient(NodeId i, NodeId j);

    std::vector<Edge> directed_edges() const;       // sorted
    std::vector<NodePair> undirected_edges() const; // sorted, i < j
    std::vector<NodePair> skeleton() const;
    std::size_t edge_count() const { return n_edges_; }
    bool fully_directed() const;

    NodeSet neighbors(NodeId i) const;  // all adjacent nodes, sorted

    friend bool operator==(const Pdag& a, const Pdag& b) {
        return a.p_ == b.p_ && a.marks_ == b.marks_;
    }

    void check_node(NodeId i) const {
        if (i < 0 || i >= p_) throw Error("node id out of range");
    }

private:
    // 0 = none, 1 = i->j (and -1 mirrored), 2 = undirected (both sides).
    std::int8_t mark(NodeId i, NodeId j) const {
        check_node(i);
        check_node(j);
        return marks_[static_cast<std::size_t>(i) * p_ + j];
    }
    std::int8_t& mark_ref(NodeId i, NodeId j) {
        return marks_[static_cast<std::size_t>(i) * p_ + j];
    }

    int p_ = 0;
    std::size_t n_edges_ = 0;
    std::vector<std::int8_t> marks_;
};

// Set helpers used across modules (inputs sorted, outputs sorted).
namespace setops {
bool contains(const NodeSet& s, NodeId x);
bool is_subset(const NodeSet& a, const NodeSet& b);
NodeSet set_union(const NodeSet& a, const NodeSet& b);
NodeSet set_minus(const NodeSet& a, const NodeSet& b);
NodeSet complement(int p, const NodeSet& a);
}  // namespace setops

}  // namespace phsem
