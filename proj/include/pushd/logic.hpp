#pragma once

// Shared vocabulary: literals, cubes, clauses, total states, signatures and
// subsumption.  Literal codes follow the AIGER convention (2v / 2v+1), so a
// parsed circuit literal can be used as a solver literal unchanged.

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace pushd {

using Var = std::uint32_t;

class Lit {
 public:
  constexpr Lit() = default;
  constexpr explicit Lit(std::uint32_t code) : code_(code) {}
  constexpr Lit(Var v, bool negated) : code_(2 * v + (negated ? 1u : 0u)) {}

  static constexpr Lit pos(Var v) { return Lit(v, false); }
  static constexpr Lit neg(Var v) { return Lit(v, true); }

  constexpr std::uint32_t code() const { return code_; }
  constexpr Var var() const { return code_ >> 1; }
  constexpr bool negated() const { return (code_ & 1u) != 0; }
  constexpr Lit operator~() const { return Lit(code_ ^ 1u); }

  friend constexpr auto operator<=>(Lit, Lit) = default;

 private:
  std::uint32_t code_ = 0;
};

std::string to_string(Lit l);

// Bit (v mod 64) for every occurring variable v.
std::uint64_t signature(std::span<const Lit> lits);

namespace detail {
struct CubeTag {};
struct ClauseTag {};
}  // namespace detail

/// Strictly sorted, consistent set of literals with a cached 64-bit signature.
/// Cube and Clause are distinct instantiations so they cannot be mixed up at
/// call sites.
template <class Tag>
class LitSet {
 public:
  LitSet() = default;
  /// Sorts and removes duplicates; throws std::invalid_argument if a
  /// variable occurs in both polarities.
  explicit LitSet(std::vector<Lit> lits);
  LitSet(std::initializer_list<Lit> lits) : LitSet(std::vector<Lit>(lits)) {}

  std::span<const Lit> lits() const { return lits_; }
  std::size_t size() const { return lits_.size(); }
  bool empty() const { return lits_.empty(); }
  std::uint64_t sig() const { return sig_; }
  auto begin() const { return lits_.begin(); }
  auto end() const { return lits_.end(); }
  Lit operator[](std::size_t i) const { return lits_[i]; }

  bool contains(Lit l) const;

  friend bool operator==(const LitSet& a, const LitSet& b) { return a.lits_ == b.lits_; }
  friend bool operator<(const LitSet& a, const LitSet& b) { return a.lits_ < b.lits_; }

 private:
  std::vector<Lit> lits_;
  std::uint64_t sig_ = 0;
};

using Cube = LitSet<detail::CubeTag>;
using Clause = LitSet<detail::ClauseTag>;

/// A total assignment over the latch variables, stored as the full cube
/// (one literal per latch, sorted).
class State {
 public:
  State() = default;
  explicit State(Cube cube) : cube_(std::move(cube)) {}

  const Cube& cube() const { return cube_; }
  std::size_t size() const { return cube_.size(); }
  /// Value of latch variable v; throws std::out_of_range if v is not part of
  /// the state.
  bool value(Var v) const;
  /// True when every latch is 0 (the initial state).
  bool is_all_zero() const;

  friend bool operator==(const State&, const State&) = default;

 private:
  Cube cube_;
};

Clause negate(const Cube& c);
Cube negate(const Clause& c);

/// Literal-set inclusion c ⊆ d, signature pre-filter then one merge pass.
bool subsumes(const Clause& c, const Clause& d);

/// True iff every literal of c is falsified by w, i.e. c ⊆ ¬w.
bool clause_covers_state(const Clause& c, const State& w);

/// True iff w satisfies every literal of the cube.
bool state_satisfies(const State& w, const Cube& cube);

bool has_positive_literal(std::span<const Lit> lits);

std::string to_string(const Clause& c);
std::string to_string(const Cube& c);

}  // namespace pushd
