#pragma once

// Plaisted-Greenbaum CNF for the transition relation.
//
// Variable layout: solver variable v (0 < v <= max_var) is the AIGER
// variable v over the current frame; variable 0 is the constant, fixed false
// by `constant_clause`; the primed copy of latch i is max_var + 1 + i.

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "pushd/aiger.hpp"
#include "pushd/logic.hpp"

namespace pushd::sat {
class Solver;
}

namespace pushd::encoder {

struct EncodedSystem {
  std::vector<Clause> trans_clauses;  // gate definitions and latch-update equalities
  std::vector<Clause> init_clauses;   // one unit ¬l per latch
  Clause constant_clause;             // {¬x0}
  Lit bad_literal;
  std::vector<Var> latch_vars;  // declaration order
  std::vector<Var> input_vars;  // declaration order
  std::size_t var_count = 0;

  /// Next-frame copy of a latch variable; throws std::out_of_range for
  /// anything else.
  Var prime(Var v) const;
  /// Inverse of prime(); nullopt for variables that are not primed latches.
  std::optional<Var> unprime(Var v) const;

  std::vector<std::int64_t> prime_of;    // indexed by variable, -1 if none
  std::vector<std::int64_t> unprime_of;  // indexed by variable, -1 if none
};

EncodedSystem encode(const aiger::TransitionSystem& sys);

/// Literal-wise image of a latch cube under the prime map.
std::vector<Lit> prime_cube(const EncodedSystem& enc, const Cube& c);
/// Maps primed latch literals back to the current frame.
Cube unprime_cube(const EncodedSystem& enc, std::span<const Lit> primed);

/// Loads the constant unit and the transition clauses.
void load_transition(sat::Solver& solver, const EncodedSystem& enc);
void load_init(sat::Solver& solver, const EncodedSystem& enc);

/// DIMACS dump of the constant unit plus transition clauses.  DIMACS variable
/// v+1 stands for solver variable v.
void write_dimacs(std::ostream& os, const EncodedSystem& enc);

}  // namespace pushd::encoder
