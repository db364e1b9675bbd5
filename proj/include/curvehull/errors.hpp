#pragma once

#include <stdexcept>
#include <string>

namespace curvehull {

/// Inputs that do not fit together: variable mismatches, wrong arities,
/// elements of different rings, empty subspaces.
class StructuralError : public std::invalid_argument {
 public:
  explicit StructuralError(const std::string& what) : std::invalid_argument(what) {}
};

/// A value lies outside the domain of an operation, e.g. an evaluation point
/// that is not on the curve.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// The relaxation data violates a precondition of the construction
/// (for example L is not contained in U).
class ConstructionError : public std::runtime_error {
 public:
  explicit ConstructionError(const std::string& what) : std::runtime_error(what) {}
};

/// Problem size exceeds what the dense solver accepts.
class CapacityError : public std::length_error {
 public:
  explicit CapacityError(const std::string& what) : std::length_error(what) {}
};

/// The SDP solver could not certify an answer.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical results contradict an assumption (e.g. an unbounded relaxation
/// for a compact set).
class InconsistencyError : public std::runtime_error {
 public:
  explicit InconsistencyError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace curvehull
