#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "builder.hpp"
#include "pushd/encoder.hpp"
#include "pushd/ic3.hpp"
#include "pushd/oracle.hpp"

using namespace pushd;
using namespace pushd::ic3;
using pushd::testkit::AigBuilder;

namespace {

Lit P(Var v) { return Lit::pos(v); }
Lit N(Var v) { return Lit::neg(v); }

// Owns the system and its encoding so an Engine can reference both.
struct Fixture {
  aiger::TransitionSystem sys;
  encoder::EncodedSystem enc;
  explicit Fixture(aiger::TransitionSystem s) : sys(std::move(s)), enc(encoder::encode(sys)) {}
  Engine engine(EngineConfig cfg = {}) const { return Engine(sys, enc, cfg); }
};

State state(const aiger::TransitionSystem& sys, std::vector<bool> v) { return aiger::make_state(sys, v); }

// next(l) = l, bad = l
aiger::TransitionSystem self_loop() { return aiger::parse_aag("aag 1 0 1 1 0\n2 2\n2\n"); }
// next(l) = i, bad = l
aiger::TransitionSystem follow_input() { return aiger::parse_aag("aag 2 1 1 1 0\n2\n4 2\n4\n"); }

std::vector<EngineConfig> all_configs() {
  std::vector<EngineConfig> out;
  for (Mode m : {Mode::none, Mode::iteration, Mode::triggered}) {
    EngineConfig c;
    c.mode = m;
    out.push_back(c);
  }
  EngineConfig w;
  w.wdm = true;
  out.push_back(w);
  return out;
}

bool implies_not(const encoder::EncodedSystem& enc, const std::vector<Clause>& phi, Lit l) {
  sat::Solver s;
  s.ensure_vars(enc.var_count);
  for (const auto& c : phi) s.add_clause(c.lits());
  return s.solve({l}).is_unsat();
}

}  // namespace

// --- check -------------------------------------------------------------------------

TEST(Check, ToggleIsUnsafeInOneStep) {
  Fixture f(testkit::toggle());
  for (const auto& cfg : all_configs()) {
    auto out = check(f.sys, f.enc, cfg);
    ASSERT_TRUE(out.unsafe()) << to_string(cfg.mode);
    const auto& t = std::get<Unsafe>(out.verdict).trace;
    EXPECT_EQ(t.length(), 1u);
    EXPECT_TRUE(t.initial.is_all_zero());
    EXPECT_TRUE(aiger::replay(f.sys, t));
  }
}

TEST(Check, LatchAndInputIsSafeWithNotL) {
  Fixture f(testkit::latch_and_input());
  for (const auto& cfg : all_configs()) {
    auto out = check(f.sys, f.enc, cfg);
    ASSERT_TRUE(out.safe()) << to_string(cfg.mode);
    const auto& phi = std::get<Safe>(out.verdict).invariant;
    EXPECT_TRUE(verify_invariant(f.enc, phi));
    EXPECT_TRUE(implies_not(f.enc, phi, P(2)));
  }
}

TEST(Check, ConstantFalseBadConvergesAtFrontierZero) {
  Fixture f(testkit::const_false());
  for (const auto& cfg : all_configs()) {
    auto out = check(f.sys, f.enc, cfg);
    ASSERT_TRUE(out.safe());
    EXPECT_EQ(out.stats.frames, 0u);
  }
}

TEST(Check, InitialStateBadGivesEmptyTrace) {
  Fixture f(aiger::parse_aag("aag 1 0 1 1 0\n2 2\n3\n"));
  for (const auto& cfg : all_configs()) {
    auto out = check(f.sys, f.enc, cfg);
    ASSERT_TRUE(out.unsafe());
    EXPECT_EQ(std::get<Unsafe>(out.verdict).trace.length(), 0u);
  }
}

TEST(Check, MaxFramesGivesResourceOut) {
  Fixture f(testkit::counter(4, 12, 10));
  EngineConfig cfg;
  cfg.max_frames = 0;
  EXPECT_TRUE(check(f.sys, f.enc, cfg).unknown());
  cfg.max_frames = 2;
  auto out = check(f.sys, f.enc, cfg);
  if (out.unknown()) {
    EXPECT_EQ(std::get<ResourceOut>(out.verdict).reason, "frame limit reached");
  }
  EXPECT_FALSE(out.unsafe());
}

TEST(Check, StepLimitGivesResourceOutOrValidAnswer) {
  for (const auto& [name, sys] : testkit::handcrafted_corpus()) {
    EngineConfig cfg;
    cfg.sat_step_limit = 1;
    auto out = check(sys, cfg);
    auto truth = oracle::bfs_check_serial(sys);
    if (out.safe()) {
      EXPECT_TRUE(std::holds_alternative<oracle::Safe>(truth)) << name;
    }
    if (out.unsafe()) {
      EXPECT_TRUE(std::holds_alternative<oracle::Unsafe>(truth)) << name;
    }
  }
}

TEST(Check, WdmRequiresTriggered) {
  Fixture f(testkit::toggle());
  EngineConfig cfg;
  cfg.mode = Mode::iteration;
  cfg.wdm = true;
  EXPECT_THROW(f.engine(cfg), std::invalid_argument);
}

TEST(Mode, Names) {
  for (Mode m : {Mode::none, Mode::iteration, Mode::triggered}) EXPECT_EQ(parse_mode(to_string(m)), m);
  EXPECT_FALSE(parse_mode("sometimes"));
}

// --- get_bad_state -------------------------------------------------------------------

TEST(GetBadState, Examples) {
  Fixture tog(testkit::toggle());
  auto e = tog.engine();
  EXPECT_FALSE(e.get_bad_state(0));
  auto w = e.get_bad_state(1);
  ASSERT_TRUE(w);
  EXPECT_TRUE(w->state.value(1));

  Fixture cf(testkit::const_false());
  auto e2 = cf.engine();
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_FALSE(e2.get_bad_state(k));
    e2.advance_frontier();
  }
}

// --- handle_obligation -----------------------------------------------------------------

TEST(HandleObligation, IndexZeroIsCounterexample) {
  Fixture f(testkit::toggle());
  auto e = f.engine();
  // ⟨(l=1), 0⟩ with an empty final step; the trace is reported whether or
  // not the state is initial, replay is the run loop's business.
  auto id = e.add_obligation(state(f.sys, {true}), 0, std::nullopt, aiger::Step{});
  EXPECT_EQ(e.handle_obligation(id), Engine::ObligationEffect::counterexample);
  ASSERT_TRUE(e.counterexample());
}

TEST(HandleObligation, TogglePredecessor) {
  Fixture f(testkit::toggle());
  auto e = f.engine();
  e.advance_frontier();
  auto id = e.add_obligation(state(f.sys, {true}), 1, std::nullopt, aiger::Step{});
  EXPECT_EQ(e.handle_obligation(id), Engine::ObligationEffect::predecessor);
  const auto& layer0 = e.frames().layer(0);
  ASSERT_EQ(layer0.obligations.size(), 1u);
  const auto& pred = e.obligation(layer0.obligations.back());
  EXPECT_TRUE(pred.state.is_all_zero());
  EXPECT_EQ(pred.successor, id);
  EXPECT_EQ(e.frames().layer(1).obligations.size(), 1u);  // ⟨s,1⟩ stays queued
  EXPECT_EQ(e.handle_obligation(layer0.obligations.back()), Engine::ObligationEffect::counterexample);
  auto t = *e.counterexample();
  EXPECT_EQ(t.length(), 1u);
  EXPECT_TRUE(aiger::replay(f.sys, t));
}

TEST(HandleObligation, LatchAndInputBlocks) {
  Fixture f(testkit::latch_and_input());
  auto e = f.engine();
  e.advance_frontier();
  auto id = e.add_obligation(state(f.sys, {true}), 1, std::nullopt, aiger::Step{{false}});
  EXPECT_EQ(e.handle_obligation(id), Engine::ObligationEffect::blocked);
  ASSERT_EQ(e.frames().layer(1).records.size(), 1u);
  EXPECT_EQ(e.frames().layer(1).records[0].clause, (Clause{N(2)}));
  // i = frontier: rescheduling to 2 would pass the frontier, so it is dropped.
  EXPECT_EQ(e.stats().obligations_dropped, 1u);
}

// --- minimize_cube -----------------------------------------------------------------------

TEST(MinimizeCube, SinglePositiveLiteralKept) {
  Fixture f(testkit::latch_and_input());
  auto e = f.engine();
  e.advance_frontier();
  Cube s0{P(2)};
  const std::vector<Lit> order{P(2)};
  EXPECT_EQ(e.minimize_cube(s0, 1, order), s0);
}

TEST(MinimizeCube, InputControlledLatchDropped) {
  AigBuilder b;
  Lit i = b.input();
  Lit l0 = b.latch(), l1 = b.latch();
  b.set_next(l0, l0);
  b.set_next(l1, i);
  b.set_bad(b.land(l0, l1));
  Fixture f(b.build());
  auto e = f.engine();
  e.advance_frontier();
  Cube s0{l0, l1};
  for (auto order : {std::vector<Lit>{l0, l1}, std::vector<Lit>{l1, l0}})
    EXPECT_EQ(e.minimize_cube(s0, 1, order), (Cube{l0})) << to_string(order[0]);
}

TEST(MinimizeCube, EveryOrderKeepsTheContract) {
  // Four latches: l0, l1 hold, l2 copies l0, l3 follows an input.
  AigBuilder b;
  Lit i = b.input();
  std::vector<Lit> l;
  for (int k = 0; k < 4; ++k) l.push_back(b.latch());
  b.set_next(l[0], l[0]);
  b.set_next(l[1], l[1]);
  b.set_next(l[2], l[0]);
  b.set_next(l[3], i);
  b.set_bad(b.land(l[1], l[3]));
  Fixture f(b.build());
  auto e = f.engine();
  e.advance_frontier();

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Lit> lits;
    for (Lit x : l)
      if (rng() % 4 != 0) lits.push_back(rng() % 3 ? x : ~x);
    if (!has_positive_literal(lits)) continue;
    Cube s0(lits);
    sat::Solver s0check;
    encoder::load_transition(s0check, f.enc);
    encoder::load_init(s0check, f.enc);
    if (!s0check.solve(encoder::prime_cube(f.enc, s0)).is_unsat()) continue;
    std::vector<Lit> order(s0.begin(), s0.end());
    std::sort(order.begin(), order.end());
    do {
      Cube m = e.minimize_cube(s0, 1, order);
      for (Lit x : m) EXPECT_TRUE(s0.contains(x));
      EXPECT_TRUE(has_positive_literal(m.lits()));
      EXPECT_TRUE(s0check.solve(encoder::prime_cube(f.enc, m)).is_unsat());
    } while (std::next_permutation(order.begin(), order.end()));
  }
}

// --- WDM ------------------------------------------------------------------------------------

TEST(Wdm, ScoresByFalsifiedWitnesses) {
  // latches x0 = var 1, x1 = var 2
  auto st = [](bool a, bool b) { return State(Cube{Lit(1, !a), Lit(2, !b)}); };
  Layer layer;
  layer.records.push_back({1, Clause{N(1), P(2)}, Witness{st(true, true), {}}});
  layer.records.push_back({2, Clause{N(1), N(2)}, Witness{st(true, false), {}}});
  Cube s0{N(1), P(2)};
  EXPECT_EQ(witness_directed_order(s0, layer), (std::vector<Lit>{N(1), P(2)}));


  // Scores can reverse the code order: x0=1 (code 2) is falsified by one
  // witness, x1=0 (code 5) by two.
  Layer other;
  other.records.push_back({1, Clause{P(1)}, Witness{st(false, true), {}}});
  other.records.push_back({2, Clause{P(1)}, Witness{st(true, true), {}}});
  EXPECT_EQ(witness_directed_order(Cube{P(1), N(2)}, other), (std::vector<Lit>{N(2), P(1)}));
}

TEST(Wdm, TieBreakAndCoveredWitness) {
  auto st = [](bool a, bool b) { return State(Cube{Lit(1, !a), Lit(2, !b)}); };
  Cube s0{N(1), P(2)};  // codes 3 and 4
  Layer empty;
  EXPECT_EQ(witness_directed_order(s0, empty), (std::vector<Lit>{N(1), P(2)}));
  Layer covered;  // (x0=0, x1=1) satisfies all of s0: contributes nothing
  covered.records.push_back({1, Clause{P(1)}, Witness{st(false, true), {}}});
  EXPECT_EQ(witness_directed_order(s0, covered), (std::vector<Lit>{N(1), P(2)}));
  Layer pending;  // records without witness do not count
  pending.records.push_back({1, Clause{P(1)}, std::nullopt});
  EXPECT_EQ(witness_directed_order(Cube{P(1), P(2)}, pending), (std::vector<Lit>{P(1), P(2)}));
}

// --- push requests --------------------------------------------------------------------------

TEST(HandlePushRequest, SelfLoopPushes) {
  Fixture f(self_loop());
  auto e = f.engine();
  e.advance_frontier();
  e.add_clause_cascade(Clause{N(1)}, 1, Origin::blocking);
  ASSERT_EQ(e.frames().layer(1).pending, 1u);
  EXPECT_EQ(e.handle_push_request(1, 0), Engine::PushEffect::pushed);
  EXPECT_TRUE(e.frames().layer(1).records.empty());
  ASSERT_EQ(e.frames().layer(2).records.size(), 1u);
  EXPECT_EQ(e.frames().layer(2).records[0].clause, (Clause{N(1)}));
  // Δ_1 emptied by the push: candidate L_2 = {¬l} is inductive.
  auto phi = e.detect_convergence();
  ASSERT_TRUE(phi);
  EXPECT_EQ(*phi, std::vector<Clause>{Clause{N(1)}});
}

TEST(HandlePushRequest, FollowInputGetsWitness) {
  Fixture f(follow_input());
  auto e = f.engine();
  e.advance_frontier();
  const Var l = 2;
  e.add_clause_cascade(Clause{N(l)}, 1, Origin::blocking);
  EXPECT_EQ(e.handle_push_request(1, 0), Engine::PushEffect::witness);
  const auto& rec = e.frames().layer(1).records[0];
  ASSERT_TRUE(rec.witness);
  EXPECT_FALSE(rec.witness->state.value(l));
  EXPECT_EQ(rec.witness->inputs.values, std::vector<bool>{true});
  EXPECT_EQ(e.frames().layer(1).pending, 0u);
  EXPECT_THROW(e.handle_push_request(1, 0), std::invalid_argument);
}

// --- insertion cascade ---------------------------------------------------------------------------

namespace {

// x1' = x0 ∧ i, x0' = j; bad = x0 ∧ x1
aiger::TransitionSystem gated_pair() {
  AigBuilder b;
  Lit i = b.input(), j = b.input();
  Lit x0 = b.latch(), x1 = b.latch();
  b.set_next(x0, j);
  b.set_next(x1, b.land(x0, i));
  b.set_bad(b.land(x0, x1));
  return b.build();
}

struct Recorder : EngineObserver {
  std::vector<std::tuple<std::size_t, Clause, RequestCause>> filed;
  void request_filed(std::size_t level, const ClauseRecord& r, RequestCause cause, const Clause&,
                     const Witness*) override {
    filed.emplace_back(level, r.clause, cause);
  }
};

}  // namespace

TEST(Cascade, SubsumedRemovedAndDownwardPassStops) {
  Fixture f(gated_pair());
  const Var x0 = f.sys.latches[0].lit.var(), x1 = f.sys.latches[1].lit.var();
  auto e = f.engine();
  e.advance_frontier();
  e.advance_frontier();
  e.add_clause_cascade(Clause{N(x0), N(x1)}, 2, Origin::blocking);
  e.add_clause_cascade(Clause{N(x0)}, 1, Origin::blocking);
  ASSERT_EQ(e.frames().layer(1).records.size(), 1u);
  e.add_clause_cascade(Clause{N(x0)}, 2, Origin::blocking);
  ASSERT_EQ(e.frames().layer(2).records.size(), 1u);
  EXPECT_EQ(e.frames().layer(2).records[0].clause, (Clause{N(x0)}));
  // The identical copy in Δ_1 is redundant now and goes.
  EXPECT_TRUE(e.frames().layer(1).records.empty());
  EXPECT_GE(e.stats().clauses_subsumed, 2u);
}

TEST(Cascade, EarlySkipWhenAlreadyImplied) {
  Fixture f(gated_pair());
  const Var x0 = f.sys.latches[0].lit.var(), x1 = f.sys.latches[1].lit.var();
  auto e = f.engine();
  e.advance_frontier();
  e.advance_frontier();
  e.add_clause_cascade(Clause{N(x0)}, 2, Origin::blocking);
  e.add_clause_cascade(Clause{N(x0), N(x1)}, 1, Origin::blocking);
  EXPECT_TRUE(e.frames().layer(1).records.empty());
  EXPECT_EQ(e.stats().insertions_skipped, 1u);
}

TEST(Cascade, StrongerClauseBelowStopsDownwardPass) {
  Fixture f(gated_pair());
  const Var x0 = f.sys.latches[0].lit.var(), x1 = f.sys.latches[1].lit.var();
  auto e = f.engine();
  for (int k = 0; k < 3; ++k) e.advance_frontier();
  e.add_clause_cascade(Clause{N(x1), P(x0)}, 1, Origin::blocking);
  e.add_clause_cascade(Clause{N(x1)}, 2, Origin::blocking);
  // Δ_2's {¬x1} subsumes Δ_1's clause; it was removed on the way down.
  EXPECT_TRUE(e.frames().layer(1).records.empty());
  e.add_clause_cascade(Clause{N(x1)}, 1, Origin::blocking);  // implied: skipped
  e.add_clause_cascade(Clause{N(x1), N(x0)}, 3, Origin::blocking);
  EXPECT_EQ(e.frames().layer(2).records.size(), 1u);
  EXPECT_EQ(e.frames().layer(3).records.size(), 1u);
}

TEST(Cascade, CoveredWitnessBecomesRequest) {
  Fixture f(gated_pair());
  const Var x0 = f.sys.latches[0].lit.var(), x1 = f.sys.latches[1].lit.var();
  Recorder rec;
  EngineConfig cfg;
  cfg.observer = &rec;
  auto e = f.engine(cfg);
  e.advance_frontier();
  e.add_clause_cascade(Clause{N(x1)}, 1, Origin::blocking);
  ASSERT_EQ(e.handle_push_request(1, 0), Engine::PushEffect::witness);
  const auto& w = *e.frames().layer(1).records[0].witness;
  ASSERT_TRUE(w.state.value(x0));  // reaching x1' = 1 needs x0 = 1
  rec.filed.clear();
  e.add_clause_cascade(Clause{N(x0)}, 1, Origin::blocking);
  const auto& layer = e.frames().layer(1);
  ASSERT_EQ(layer.records.size(), 2u);
  EXPECT_TRUE(layer.records[0].push_pending());
  EXPECT_EQ(layer.pending, 2u);
  ASSERT_EQ(rec.filed.size(), 2u);
  EXPECT_EQ(std::get<1>(rec.filed[0]), (Clause{N(x1)}));
  EXPECT_EQ(std::get<2>(rec.filed[0]), RequestCause::witness_covered);
  EXPECT_EQ(std::get<2>(rec.filed[1]), RequestCause::new_clause);
}

TEST(Cascade, CoveredObligationRescheduled) {
  Fixture f(gated_pair());
  const Var x0 = f.sys.latches[0].lit.var();
  auto e = f.engine();
  e.advance_frontier();
  e.advance_frontier();
  auto id = e.add_obligation(state(f.sys, {true, false}), 1, std::nullopt, aiger::Step{{false, false}});
  e.add_clause_cascade(Clause{N(x0)}, 1, Origin::blocking);
  EXPECT_EQ(e.obligation(id).index, 2u);
  EXPECT_TRUE(e.frames().layer(1).obligations.empty());
  EXPECT_EQ(e.frames().layer(2).obligations.size(), 1u);
  // At the frontier the moved obligation is dropped instead.
  e.add_clause_cascade(Clause{N(x0)}, 2, Origin::blocking);
  EXPECT_TRUE(e.frames().layer(2).obligations.empty());
  EXPECT_EQ(e.stats().obligations_dropped, 1u);
}

TEST(Cascade, RejectsClauseExcludingInitialState) {
  Fixture f(gated_pair());
  auto e = f.engine();
  e.advance_frontier();
  EXPECT_THROW(e.add_clause_cascade(Clause{P(f.sys.latches[0].lit.var())}, 1, Origin::blocking), std::logic_error);
  EXPECT_THROW(e.add_clause_cascade(Clause{N(f.sys.latches[0].lit.var())}, 0, Origin::blocking),
               std::invalid_argument);
}

// --- convergence and certificates -------------------------------------------------------------------

TEST(DetectConvergence, NoEmptyDeltaNoCandidate) {
  Fixture f(self_loop());
  auto e = f.engine();
  e.add_clause_cascade(Clause{N(1)}, 1, Origin::blocking);
  EXPECT_FALSE(e.detect_convergence());
  EXPECT_FALSE(e.detect_convergence_all());
}

TEST(VerifyInvariant, Examples) {
  Fixture lai(testkit::latch_and_input());
  const std::vector<Clause> not_l{Clause{N(2)}};
  EXPECT_TRUE(verify_invariant(lai.enc, not_l));

  Fixture tog(testkit::toggle());
  auto empty = verify_invariant(tog.enc, {});
  EXPECT_FALSE(empty);
  EXPECT_EQ(empty.failed_check, "safety");
  ASSERT_TRUE(empty.violating_state);
  EXPECT_TRUE(empty.violating_state->value(1));

  const std::vector<Clause> init{Clause{N(1)}};
  auto r = verify_invariant(tog.enc, init);
  EXPECT_FALSE(r);
  EXPECT_EQ(r.failed_check, "consecution");

  const std::vector<Clause> wrong{Clause{P(2)}};
  EXPECT_EQ(verify_invariant(lai.enc, wrong).failed_check, "initiation");

  const std::vector<Clause> input_clause{Clause{N(1)}};
  EXPECT_FALSE(verify_invariant(lai.enc, input_clause));
}

// --- whole runs against the oracle -------------------------------------------------------------------

namespace {

void expect_agrees(const std::string& name, const aiger::TransitionSystem& sys, EngineConfig cfg) {
  cfg.debug_checks = true;
  auto truth = oracle::bfs_check_serial(sys);
  ASSERT_FALSE(std::holds_alternative<oracle::TooLarge>(truth));
  auto out = check(sys, cfg);
  if (out.unknown()) {
    EXPECT_EQ(cfg.mode, Mode::none) << name;
    return;
  }
  EXPECT_EQ(out.safe(), std::holds_alternative<oracle::Safe>(truth)) << name << " " << to_string(cfg.mode);
}

}  // namespace

TEST(Runs, HandcraftedCorpusAllModes) {
  for (const auto& [name, sys] : testkit::handcrafted_corpus())
    for (auto cfg : all_configs()) {
      cfg.max_frames = 200;
      expect_agrees(name, sys, cfg);
    }
}

TEST(Runs, RandomCorpusAllModes) {
  for (const auto& [name, sys] : testkit::random_corpus(40, 7))
    for (auto cfg : all_configs()) {
      cfg.max_frames = 60;
      expect_agrees(name, sys, cfg);
    }
}

TEST(Runs, NoRescheduleGivesMinimalTraces) {
  for (const auto& [name, sys] : testkit::handcrafted_corpus()) {
    auto truth = oracle::bfs_check_serial(sys);
    const auto* u = std::get_if<oracle::Unsafe>(&truth);
    if (!u) continue;
    EngineConfig cfg;
    cfg.reschedule = false;
    auto out = check(sys, cfg);
    ASSERT_TRUE(out.unsafe()) << name;
    EXPECT_EQ(std::get<Unsafe>(out.verdict).trace.length(), u->trace.length()) << name;
  }
}

TEST(Runs, SeedsChangeNothingButTheRoute) {
  Fixture f(testkit::counter(4, 9, 10));
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    EngineConfig cfg;
    cfg.seed = seed;
    auto a = check(f.sys, f.enc, cfg);
    auto b = check(f.sys, f.enc, cfg);
    ASSERT_TRUE(a.unsafe());
    EXPECT_EQ(a.stats.sat_calls(), b.stats.sat_calls());
  }
}
