#pragma once

// IC3 with delta-encoded layers and three scheduling modes:
//
//   iteration  blocking phase, then one propagation pass per frontier step
//   triggered  clauses keep either a witness (a model from a failed push) or
//              a pending push request; a request is re-filed exactly when a
//              newly inserted clause covers the witness, and requests are
//              served interleaved with proof obligations
//   none       no pushing at all; convergence only through a delta layer
//              that empties
//
// One SAT solver per time index; solver i holds T, I (index 0 only) and every
// clause of L_i = Δ_i ∪ Δ_{i+1} ∪ ...  Clauses dropped from the deltas by
// subsumption stay in the solvers, where they are implied.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>
#include <deque>

#include "pushd/aiger.hpp"
#include "pushd/encoder.hpp"
#include "pushd/logic.hpp"
#include "pushd/sat.hpp"

namespace pushd::ic3 {

enum class Mode { none, iteration, triggered };

std::string_view to_string(Mode m);
std::optional<Mode> parse_mode(std::string_view s);

struct Witness {
  State state;
  aiger::Step inputs;
};

struct ClauseRecord {
  std::uint64_t id = 0;
  Clause clause;
  std::optional<Witness> witness;  // empty: a push request is pending

  bool push_pending() const { return !witness.has_value(); }
};

struct ProofObligation {
  State state;
  std::size_t index = 0;
  std::optional<std::size_t> successor;
  // Inputs of the transition into the successor; for the root obligation,
  // the inputs under which the state raises bad.
  aiger::Step inputs;
};

struct Layer {
  std::vector<ClauseRecord> records;    // Δ_j
  std::vector<std::size_t> obligations;  // O_j, used as a stack
  std::size_t pending = 0;               // records without witness
};

class Frames {
 public:
  std::size_t frontier() const { return frontier_; }
  /// Number of layer slots allocated; slot 0 only ever holds obligations.
  std::size_t size() const { return layers_.size(); }
  const Layer& layer(std::size_t j) const { return layers_.at(j); }
  /// Clauses of L_i.
  std::vector<Clause> clauses_from(std::size_t i) const;

 private:
  friend class Engine;
  std::vector<Layer> layers_;
  std::size_t frontier_ = 0;
};

/// Literals of s0 by descending count of the layer's witnesses that falsify
/// them, ties by ascending code.
std::vector<Lit> witness_directed_order(const Cube& s0, const Layer& layer);

enum class Origin { blocking, push };
enum class RequestCause { new_clause, witness_covered };

/// Instrumentation hooks; all default to no-ops.
class EngineObserver {
 public:
  virtual ~EngineObserver() = default;
  virtual void insertion_started(std::size_t /*level*/, const Clause& /*c*/, Origin) {}
  virtual void insertion_done(const Frames&, std::size_t /*level*/, const Clause& /*c*/, Origin) {}
  virtual void request_filed(std::size_t /*level*/, const ClauseRecord&, RequestCause,
                             const Clause& /*trigger*/, const Witness* /*killed*/) {}
  virtual void witness_attached(std::size_t /*level*/, const ClauseRecord&) {}
  virtual void quiescent(const Frames&) {}
};

struct Stats {
  std::uint64_t sat_bad = 0;
  std::uint64_t sat_block = 0;
  std::uint64_t sat_minimize = 0;
  std::uint64_t sat_push = 0;
  std::uint64_t sat_verify = 0;
  std::uint64_t clauses_learned = 0;
  std::uint64_t clauses_pushed = 0;
  std::uint64_t clauses_subsumed = 0;
  std::uint64_t insertions_skipped = 0;
  std::uint64_t witnesses_created = 0;
  std::uint64_t witnesses_killed = 0;
  std::uint64_t obligations_created = 0;
  std::uint64_t obligations_rescheduled = 0;
  std::uint64_t obligations_dropped = 0;
  std::size_t frames = 0;

  std::uint64_t sat_calls() const { return sat_bad + sat_block + sat_minimize + sat_push + sat_verify; }
};

struct EngineConfig {
  Mode mode = Mode::triggered;
  bool wdm = false;  // requires Mode::triggered
  std::size_t max_frames = 1000;
  std::uint64_t sat_step_limit = 0;  // conflicts per SAT call, 0 = unlimited
  std::uint64_t seed = 0;
  bool verify_certificates = true;
  bool reschedule = true;     // false: footnote-style minimal-length search
  bool debug_checks = false;  // assert engine invariants at every quiescence
  EngineObserver* observer = nullptr;
};

struct Safe {
  std::vector<Clause> invariant;
};
struct Unsafe {
  aiger::Trace trace;
};
struct ResourceOut {
  std::string reason;
};

struct CheckOutcome {
  std::variant<Safe, Unsafe, ResourceOut> verdict;
  Stats stats;

  bool safe() const { return std::holds_alternative<Safe>(verdict); }
  bool unsafe() const { return std::holds_alternative<Unsafe>(verdict); }
  bool unknown() const { return std::holds_alternative<ResourceOut>(verdict); }
};

struct VerifyResult {
  bool ok = true;
  std::string failed_check;  // "initiation", "consecution" or "safety"
  std::optional<Clause> failed_clause;
  std::optional<State> violating_state;
  std::uint64_t solves = 0;

  explicit operator bool() const { return ok; }
};

/// Checks I ⇒ φ, φ ∧ T ⇒ φ′ and φ ⇒ ¬bad on fresh solvers.
VerifyResult verify_invariant(const encoder::EncodedSystem& enc, std::span<const Clause> phi);

CheckOutcome check(const aiger::TransitionSystem& sys, const encoder::EncodedSystem& enc, const EngineConfig& cfg);
CheckOutcome check(const aiger::TransitionSystem& sys, const EngineConfig& cfg);

class Engine {
 public:
  Engine(const aiger::TransitionSystem& sys, const encoder::EncodedSystem& enc, EngineConfig cfg);

  CheckOutcome run();

  // The steps below are what run() is made of; they are public so tests can
  // drive the engine through hand-picked situations.

  const Frames& frames() const { return frames_; }
  const Stats& stats() const { return stats_; }
  const ProofObligation& obligation(std::size_t id) const { return obligations_.at(id); }
  const std::optional<aiger::Trace>& counterexample() const { return cex_; }

  void advance_frontier();

  /// Line-4 query on solver k: a bad state with the inputs that raise bad.
  std::optional<Witness> get_bad_state(std::size_t k);

  std::size_t add_obligation(State s, std::size_t index, std::optional<std::size_t> successor, aiger::Step inputs);

  enum class ObligationEffect { predecessor, blocked, counterexample };
  ObligationEffect handle_obligation(std::size_t id);

  /// One greedy literal-dropping pass in `order`; keeps the cube I-disjoint.
  Cube minimize_cube(const Cube& s0, std::size_t i, std::span<const Lit> order);
  /// witness_directed_order over layer i.
  std::vector<Lit> wdm_order(const Cube& s0, std::size_t i) const;

  enum class PushEffect { witness, pushed };
  PushEffect handle_push_request(std::size_t level, std::size_t record_index);

  void add_clause_cascade(const Clause& c, std::size_t i, Origin origin);

  /// Tests the layers that emptied since the last call; returns a verified
  /// invariant if one of them closes the proof.
  std::optional<std::vector<Clause>> detect_convergence();
  /// Tests every empty Δ_j with 1 <= j <= frontier + 1.
  std::optional<std::vector<Clause>> detect_convergence_all();

  aiger::Trace reconstruct_trace(std::size_t id) const;

 private:
  struct ResourceExhausted {};
  enum class QueryKind { bad, block, minimize, push };

  sat::Result query(std::size_t solver, std::span<const Lit> assumptions, QueryKind kind);
  sat::Solver& solver(std::size_t i);
  void ensure_layer(std::size_t j);
  State state_from_model(const sat::Result& r) const;
  aiger::Step inputs_from_model(const sat::Result& r) const;
  std::optional<std::vector<Clause>> try_candidate(std::size_t j);

  void remove_subsumed(std::size_t j, const Clause& c);
  void kill_covered_witnesses(std::size_t j, const Clause& c);
  void reschedule_covered_obligations(std::size_t j, const Clause& c);
  void move_obligation(std::size_t id, std::size_t to);
  void erase_from_bucket(std::size_t id);

  CheckOutcome run_iteration();
  CheckOutcome run_scheduled();
  CheckOutcome finish_safe(std::vector<Clause> invariant);
  CheckOutcome finish_unsafe();
  CheckOutcome finish_unknown(std::string reason);
  void on_quiescence();
  void check_invariants() const;

  const aiger::TransitionSystem& sys_;
  const encoder::EncodedSystem& enc_;
  EngineConfig cfg_;
  Frames frames_;
  std::deque<sat::Solver> solvers_;
  std::vector<ProofObligation> obligations_;
  std::vector<std::size_t> emptied_;
  std::optional<aiger::Trace> cex_;
  Stats stats_;
  std::mt19937_64 rng_;
  std::uint64_t next_record_id_ = 1;
};

}  // namespace pushd::ic3
