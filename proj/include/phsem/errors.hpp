#pragma once

#include <stdexcept>
#include <string>

namespace phsem {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The edge set admits no topological order.
struct CyclicGraphError : Error {
    using Error::Error;
};

// Two graphs (or a graph and a partition) disagree on the node count.
struct DimensionMismatchError : Error {
    using Error::Error;
};

// An enumeration exceeded its configured budget.
struct BudgetExceededError : Error {
    using Error::Error;
};

// An edge-weight matrix has a nonzero entry outside the graph's edge set.
struct SupportViolationError : Error {
    using Error::Error;
};

// A conditioning set violates the pa(i) <= A <= V\de(i) bounds.
struct InvalidConditioningSetError : Error {
    using Error::Error;
};

// A parent Gram matrix is numerically singular (or a residual variance
// collapses to zero).
struct SingularRegressionError : Error {
    using Error::Error;
};

// Data unusable for covariance estimation, e.g. a constant column.
struct DegenerateDataError : Error {
    using Error::Error;
};

// A runtime check of a structural guarantee failed; indicates a bug.
struct InternalInconsistencyError : Error {
    using Error::Error;
};

// Malformed user input (files, names, configuration).
struct InputError : Error {
    using Error::Error;
};

}  // namespace phsem
