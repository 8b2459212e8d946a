#ifndef KINDFORGE_SOLVER_HPP
#define KINDFORGE_SOLVER_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kindforge/solution.hpp"
#include "kindforge/syntax.hpp"

namespace kindforge {

struct SolverConfig {
  // Also drop constraints that can no longer update the solution, not only
  // the ones already known to hold.
  bool optimize = true;
  // Defaults to 3 * (number of variables) + 3.
  std::optional<std::size_t> max_iterations;
  bool trace = false;
  // Start from this assignment instead of the top. Variables it does not
  // mention start at the top.
  const Solution* start = nullptr;
};

struct TraceEntry {
  std::size_t iteration;
  std::string var;
  std::string before;
  std::string after;
  std::string constraint;
  Origin origin;
};

std::string to_string(const TraceEntry& entry);

struct SolveResult {
  Solution solution;
  std::size_t iterations = 0;
  std::size_t updates = 0;
  std::vector<TraceEntry> trace;
};

// The constraint set has no solution; `constraint` is the first violation found.
class SolveError : public Error {
 public:
  SolveError(Constraint constraint, std::string lhs_resolved, std::string rhs_resolved);

  const Constraint& constraint() const { return constraint_; }
  const std::string& lhs_resolved() const { return lhs_; }
  const std::string& rhs_resolved() const { return rhs_; }

 private:
  Constraint constraint_;
  std::string lhs_;
  std::string rhs_;
};

// Every kind and multiplicity variable mentioned by the constraints.
struct VariableSet {
  std::vector<std::uint32_t> kind_vars;
  std::vector<std::uint32_t> mult_vars;
};
VariableSet variables_of(std::span<const Constraint> constraints);

// Substitutes the solution into a kind. Throws UnresolvedVariable for
// variables the solution does not cover.
Kind resolve(Kind k, const Solution& solution);

// Greatest solution by fixpoint iteration from the top of the lattice.
// Throws SolveError when unsatisfiable.
SolveResult solve(std::span<const Constraint> constraints, const SolverConfig& config = {});

// Exhaustive reference solver: the pointwise greatest satisfying assignment,
// or nullopt. Limited to 6 kind and 6 multiplicity variables (TooLarge).
std::optional<Solution> brute_force_solve(std::span<const Constraint> constraints);

// Whether `solution` satisfies every constraint.
bool satisfies(const Solution& solution, std::span<const Constraint> constraints);

}  // namespace kindforge

#endif  // KINDFORGE_SOLVER_HPP
