#pragma once

// ASCII AIGER front end and a bit-level simulator for the parsed circuit.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pushd/logic.hpp"

namespace pushd::aiger {

struct Latch {
  Lit lit;   // even, the latch variable
  Lit next;  // next-state function
};

struct AndGate {
  Lit lhs;
  Lit rhs0;
  Lit rhs1;
};

/// A parsed circuit. Latches reset to 0. Gates are kept in topological order
/// (every operand is an input, a latch, a constant, or an earlier gate).
struct TransitionSystem {
  Var max_var = 0;
  std::vector<Lit> inputs;
  std::vector<Latch> latches;
  std::vector<AndGate> gates;
  Lit bad;  // the tracked bad signal; Lit(0) is constant false
  std::size_t property_index = 0;
};

/// One input valuation, in input declaration order.
struct Step {
  std::vector<bool> values;
  friend bool operator==(const Step&, const Step&) = default;
};

/// A counterexample: `steps[t]` drives the transition out of frame t, and
/// `final_inputs` are the inputs under which the last frame raises bad.
struct Trace {
  State initial;
  std::vector<Step> steps;
  Step final_inputs;

  std::size_t length() const { return steps.size(); }
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Parses "aag" text. `property` selects among the "b" lines when present,
/// otherwise among the outputs.
TransitionSystem parse_aag(std::string_view text, std::size_t property = 0);
TransitionSystem parse_aag_file(const std::filesystem::path& path, std::size_t property = 0);

/// Serializes as AIGER 1.0 with the bad signal as the single output.
std::string to_aag(const TransitionSystem& sys);

State initial_state(const TransitionSystem& sys);
/// Builds a state from latch values given in latch declaration order.
State make_state(const TransitionSystem& sys, const std::vector<bool>& latch_values);
std::vector<bool> latch_values(const TransitionSystem& sys, const State& s);

State simulate_step(const TransitionSystem& sys, const State& s, const Step& in);
bool eval_bad(const TransitionSystem& sys, const State& s, const Step& in);

/// Checks that the trace starts in the initial state and that simulating it
/// ends in a frame where bad holds.
bool replay(const TransitionSystem& sys, const Trace& trace);

}  // namespace pushd::aiger
