#pragma once

#include <array>
#include <vector>

#include "phsem/graph.hpp"

namespace phsem {

// The four orientation rules. Patterns and orientations:
//   R1: a -> b, b - c, a and c non-adjacent           =>  b -> c
//   R2: a -> b, b -> c, a - c                         =>  a -> c
//   R3: w - x, w - y, w - z, x -> z, y -> z, x !~ y   =>  w -> z
//   R4: a - b, a - c, a - d, c -> d, d -> b, b !~ c   =>  a -> b
enum class MeekRule { R1 = 1, R2 = 2, R3 = 3, R4 = 4 };

// Number of times each rule fired during a closure (index = rule id - 1).
struct MeekStats {
    std::array<long, 4> fired{};
    long total() const { return fired[0] + fired[1] + fired[2] + fired[3]; }
};

// True iff g1 and g2 have the same skeleton and unshielded colliders.
bool markov_equivalent(const Dag& g1, const Dag& g2);

// Markov equivalence plus identical parent sets at every node lying in a
// partition block of size >= 2; decides equality of the induced models.
bool pi_equivalent(const Dag& g1, const Dag& g2, const Partition& pi);

// Fixpoint of the enabled rules. Rules are scanned in id order over the
// undirected edges in lexicographic order until a full pass changes
// nothing; the closure itself is order-independent.
Pdag apply_meek(const Pdag& pdag, const std::vector<MeekRule>& rules,
                MeekStats* stats = nullptr);

// Skeleton of g with exactly the unshielded-collider edges directed
// (phase 1 of the CPDAG construction).
Pdag pattern_with_colliders(const Dag& g);

// Copies from g the orientation of every edge incident to a node whose
// block has size >= 2 (phase 3). Copied orientations can never contradict
// edges already directed; InternalInconsistencyError guards that claim.
void copy_block_orientations(Pdag& pdag, const Dag& g, const Partition& pi);

// CPDAG of the equivalence class of g under pi:
//   1. skeleton + unshielded colliders, 2. close under R1-R3,
//   3. copy orientations at constrained nodes, 4. close under R1-R2.
Pdag cpdag(const Dag& g, const Partition& pi);

// Every DAG equivalent to g under pi, found by orienting g's skeleton in
// all ways; brute-force oracle for cpdag. Throws BudgetExceededError when
// 2^|skeleton| exceeds the budget.
std::vector<Dag> enumerate_pi_class(const Dag& g, const Partition& pi,
                                    std::size_t budget = std::size_t{1} << 20);

// Edge-union of a set of DAGs sharing one skeleton, drawn as a mixed graph.
Pdag class_union(const std::vector<Dag>& dags);

}  // namespace phsem
