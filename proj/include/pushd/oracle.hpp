#pragma once

// Explicit-state breadth-first reachability, the ground truth for small
// circuits.  bfs_check runs a level-synchronous OpenMP kernel over a
// bit-parallel netlist evaluator; bfs_check_serial is the plain queue-based
// reference on top of aiger::simulate_step and is kept for testing.

#include <cstdint>
#include <variant>
#include <vector>

#include "pushd/aiger.hpp"

namespace pushd::oracle {

struct Limits {
  std::size_t max_latches = 20;
  std::size_t max_inputs = 8;
};

struct Safe {
  std::size_t reachable_count = 0;
};
struct Unsafe {
  aiger::Trace trace;  // of minimal length
};
struct TooLarge {};

using OracleResult = std::variant<Safe, Unsafe, TooLarge>;

OracleResult bfs_check(const aiger::TransitionSystem& sys, Limits limits = {});
OracleResult bfs_check_serial(const aiger::TransitionSystem& sys, Limits limits = {});

/// Latch values packed into an integer, bit k = latch k in declaration order.
using PackedState = std::uint32_t;

/// Evaluates the netlist for one state under 64 consecutive input valuations
/// at a time (input k of valuation n is bit k of n).
class PackedNetlist {
 public:
  explicit PackedNetlist(const aiger::TransitionSystem& sys);

  std::size_t num_latches() const { return latch_vars_.size(); }
  std::size_t num_inputs() const { return input_vars_.size(); }
  std::uint64_t num_valuations() const { return std::uint64_t{1} << input_vars_.size(); }

  struct Lanes {
    std::uint64_t bad = 0;            // bit l: bad under valuation base + l
    std::vector<std::uint64_t> next;  // per latch, bit l: next value under base + l
  };
  /// `base` must be a multiple of 64; lanes past num_valuations() are zero.
  void eval(PackedState s, std::uint64_t base, Lanes& out, std::vector<std::uint64_t>& scratch) const;

 private:
  struct Gate {
    std::uint32_t lhs, a, b;  // variable index, operand literal codes
  };
  std::size_t num_vars_;
  std::vector<Var> latch_vars_;
  std::vector<std::uint32_t> next_lits_;
  std::vector<Var> input_vars_;
  std::vector<Gate> gates_;
  std::uint32_t bad_lit_;
};

aiger::Step step_from_index(const aiger::TransitionSystem& sys, std::uint64_t valuation);
State state_from_packed(const aiger::TransitionSystem& sys, PackedState s);

}  // namespace pushd::oracle
