#include <algorithm>
#include <stdexcept>

#include "pushd/ic3.hpp"

namespace pushd::ic3 {

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::none:
      return "none";
    case Mode::iteration:
      return "iteration";
    case Mode::triggered:
      return "triggered";
  }
  return "?";
}

std::optional<Mode> parse_mode(std::string_view s) {
  if (s == "none") return Mode::none;
  if (s == "iteration") return Mode::iteration;
  if (s == "triggered") return Mode::triggered;
  return std::nullopt;
}

std::vector<Clause> Frames::clauses_from(std::size_t i) const {
  std::vector<Clause> out;
  for (std::size_t j = std::max<std::size_t>(i, 1); j < layers_.size(); ++j)
    for (const auto& r : layers_[j].records) out.push_back(r.clause);
  return out;
}

Engine::Engine(const aiger::TransitionSystem& sys, const encoder::EncodedSystem& enc, EngineConfig cfg)
    : sys_(sys), enc_(enc), cfg_(cfg), rng_(cfg.seed) {
  if (cfg_.wdm && cfg_.mode != Mode::triggered)
    throw std::invalid_argument("witness-directed minimization needs triggered mode");
  ensure_layer(1);
  solver(0);
  solver(1);
}

// --- plumbing -----------------------------------------------------------------

void Engine::ensure_layer(std::size_t j) {
  if (frames_.layers_.size() <= j) frames_.layers_.resize(j + 1);
}

sat::Solver& Engine::solver(std::size_t i) {
  while (solvers_.size() <= i) {
    const std::size_t idx = solvers_.size();
    sat::Options opts;
    opts.seed = cfg_.seed;
    opts.conflict_limit = cfg_.sat_step_limit;
    opts.check_used = cfg_.debug_checks;
    auto& s = solvers_.emplace_back(opts);
    encoder::load_transition(s, enc_);
    if (idx == 0) encoder::load_init(s, enc_);
    for (std::size_t j = std::max<std::size_t>(idx, 1); j < frames_.layers_.size(); ++j)
      for (const auto& r : frames_.layers_[j].records) s.add_clause(r.clause.lits());
  }
  return solvers_[i];
}

sat::Result Engine::query(std::size_t i, std::span<const Lit> assumptions, QueryKind kind) {
  switch (kind) {
    case QueryKind::bad:
      ++stats_.sat_bad;
      break;
    case QueryKind::block:
      ++stats_.sat_block;
      break;
    case QueryKind::minimize:
      ++stats_.sat_minimize;
      break;
    case QueryKind::push:
      ++stats_.sat_push;
      break;
  }
  sat::Result r = solver(i).solve(assumptions);
  if (r.status() == sat::Status::resource_out) throw ResourceExhausted{};
  return r;
}

State Engine::state_from_model(const sat::Result& r) const {
  std::vector<Lit> lits;
  lits.reserve(enc_.latch_vars.size());
  for (Var v : enc_.latch_vars) lits.emplace_back(v, !r.model_value(v));
  return State(Cube(std::move(lits)));
}

aiger::Step Engine::inputs_from_model(const sat::Result& r) const {
  aiger::Step step;
  step.values.reserve(enc_.input_vars.size());
  for (Var v : enc_.input_vars) step.values.push_back(r.model_value(v));
  return step;
}

void Engine::advance_frontier() {
  ++frames_.frontier_;
  ensure_layer(frames_.frontier_ + 1);
  solver(frames_.frontier_ + 1);
  stats_.frames = frames_.frontier_;
}

// --- obligations --------------------------------------------------------------

std::size_t Engine::add_obligation(State s, std::size_t index, std::optional<std::size_t> successor,
                                   aiger::Step inputs) {
  if (cfg_.debug_checks && index >= 1) {
    for (const auto& c : frames_.clauses_from(index))
      if (clause_covers_state(c, s)) throw std::logic_error("extracted state violates its layer");
  }
  const std::size_t id = obligations_.size();
  obligations_.push_back({std::move(s), index, successor, std::move(inputs)});
  ensure_layer(index);
  frames_.layers_[index].obligations.push_back(id);
  ++stats_.obligations_created;
  return id;
}

void Engine::erase_from_bucket(std::size_t id) {
  auto& bucket = frames_.layers_[obligations_[id].index].obligations;
  auto it = std::find(bucket.rbegin(), bucket.rend(), id);
  if (it != bucket.rend()) bucket.erase(std::next(it).base());
}

void Engine::move_obligation(std::size_t id, std::size_t to) {
  if (cfg_.reschedule && to <= frames_.frontier_) {
    obligations_[id].index = to;
    ensure_layer(to);
    frames_.layers_[to].obligations.push_back(id);
    ++stats_.obligations_rescheduled;
  } else {
    ++stats_.obligations_dropped;
  }
}

std::optional<Witness> Engine::get_bad_state(std::size_t k) {
  const Lit bad = enc_.bad_literal;
  sat::Result r = query(k, std::span<const Lit>(&bad, 1), QueryKind::bad);
  if (!r.is_sat()) return std::nullopt;
  return Witness{state_from_model(r), inputs_from_model(r)};
}

Engine::ObligationEffect Engine::handle_obligation(std::size_t id) {
  const State s = obligations_[id].state;
  const std::size_t i = obligations_[id].index;

  // An initial state at i >= 1 can only appear after rescheduling; it is a
  // counterexample as well.
  if (i == 0 || s.is_all_zero()) {
    erase_from_bucket(id);
    cex_ = reconstruct_trace(id);
    return ObligationEffect::counterexample;
  }

  const auto primed = encoder::prime_cube(enc_, s.cube());
  sat::Result r = query(i - 1, primed, QueryKind::block);
  if (r.is_sat()) {
    add_obligation(state_from_model(r), i - 1, id, inputs_from_model(r));
    return ObligationEffect::predecessor;
  }

  erase_from_bucket(id);
  Cube s0 = encoder::unprime_cube(enc_, r.used());
  if (!has_positive_literal(s0.lits())) {
    std::vector<Lit> lits(s0.begin(), s0.end());
    for (Lit l : s.cube())
      if (!l.negated()) {
        lits.push_back(l);
        break;
      }
    s0 = Cube(std::move(lits));
  }

  std::vector<Lit> order;
  if (cfg_.wdm) {
    order = wdm_order(s0, i);
  } else {
    order.assign(s0.begin(), s0.end());
    std::shuffle(order.begin(), order.end(), rng_);
  }
  s0 = minimize_cube(s0, i, order);

  ++stats_.clauses_learned;
  add_clause_cascade(negate(s0), i, Origin::blocking);
  move_obligation(id, i + 1);
  return ObligationEffect::blocked;
}

Cube Engine::minimize_cube(const Cube& s0, std::size_t i, std::span<const Lit> order) {
  Cube cube = s0;
  for (Lit m : order) {
    if (!cube.contains(m) || cube.size() == 1) continue;
    std::vector<Lit> rest;
    for (Lit l : cube)
      if (l != m) rest.push_back(l);
    if (!has_positive_literal(rest)) continue;
    Cube candidate(std::move(rest));
    sat::Result r = query(i - 1, encoder::prime_cube(enc_, candidate), QueryKind::minimize);
    if (!r.is_unsat()) continue;
    Cube core = encoder::unprime_cube(enc_, r.used());
    if (has_positive_literal(core.lits())) {
      cube = std::move(core);
    } else {
      std::vector<Lit> lits(core.begin(), core.end());
      for (Lit l : candidate)
        if (!l.negated()) {
          lits.push_back(l);
          break;
        }
      cube = Cube(std::move(lits));
    }
  }
  return cube;
}

std::vector<Lit> witness_directed_order(const Cube& s0, const Layer& layer) {
  std::vector<std::pair<std::size_t, Lit>> scored;
  for (Lit m : s0) {
    std::size_t score = 0;
    for (const auto& r : layer.records)
      if (r.witness && r.witness->state.value(m.var()) == m.negated()) ++score;
    scored.emplace_back(score, m);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<Lit> out;
  for (const auto& [score, m] : scored) out.push_back(m);
  return out;
}

std::vector<Lit> Engine::wdm_order(const Cube& s0, std::size_t i) const {
  static const Layer empty;
  return witness_directed_order(s0, i < frames_.layers_.size() ? frames_.layers_[i] : empty);
}

// --- pushing ------------------------------------------------------------------

Engine::PushEffect Engine::handle_push_request(std::size_t level, std::size_t record_index) {
  auto& layer = frames_.layers_.at(level);
  if (record_index >= layer.records.size() || !layer.records[record_index].push_pending())
    throw std::invalid_argument("no pending push request at that position");
  const Clause c = layer.records[record_index].clause;
  sat::Result r = query(level, encoder::prime_cube(enc_, negate(c)), QueryKind::push);
  if (r.is_sat()) {
    auto& rec = frames_.layers_[level].records[record_index];
    rec.witness = Witness{state_from_model(r), inputs_from_model(r)};
    --frames_.layers_[level].pending;
    ++stats_.witnesses_created;
    if (cfg_.observer) cfg_.observer->witness_attached(level, rec);
    return PushEffect::witness;
  }
  auto& records = frames_.layers_[level].records;
  records.erase(records.begin() + static_cast<std::ptrdiff_t>(record_index));
  --frames_.layers_[level].pending;
  if (records.empty()) emptied_.push_back(level);
  ++stats_.clauses_pushed;
  add_clause_cascade(c, level + 1, Origin::push);
  return PushEffect::pushed;
}

// --- insertion cascade ----------------------------------------------------------

void Engine::remove_subsumed(std::size_t j, const Clause& c) {
  auto& layer = frames_.layers_[j];
  auto dead = std::remove_if(layer.records.begin(), layer.records.end(), [&](const ClauseRecord& r) {
    if (!subsumes(c, r.clause)) return false;
    if (r.push_pending()) --layer.pending;
    ++stats_.clauses_subsumed;
    return true;
  });
  layer.records.erase(dead, layer.records.end());
}

void Engine::kill_covered_witnesses(std::size_t j, const Clause& c) {
  for (auto& r : frames_.layers_[j].records) {
    if (!r.witness || !clause_covers_state(c, r.witness->state)) continue;
    Witness killed = std::move(*r.witness);
    r.witness.reset();
    ++frames_.layers_[j].pending;
    ++stats_.witnesses_killed;
    if (cfg_.observer) cfg_.observer->request_filed(j, r, RequestCause::witness_covered, c, &killed);
  }
}

void Engine::reschedule_covered_obligations(std::size_t j, const Clause& c) {
  auto& bucket = frames_.layers_[j].obligations;
  std::vector<std::size_t> moved;
  auto keep = std::stable_partition(bucket.begin(), bucket.end(),
                                    [&](std::size_t id) { return !clause_covers_state(c, obligations_[id].state); });
  moved.assign(keep, bucket.end());
  bucket.erase(keep, bucket.end());
  for (std::size_t id : moved) move_obligation(id, j + 1);
}

void Engine::add_clause_cascade(const Clause& c, std::size_t i, Origin origin) {
  if (i == 0) throw std::invalid_argument("layer clauses start at index 1");
  if (std::all_of(c.begin(), c.end(), [](Lit l) { return !l.negated(); }))
    throw std::logic_error("learned clause " + to_string(c) + " excludes the initial state");

  for (std::size_t j = i; j < frames_.layers_.size(); ++j)
    for (const auto& r : frames_.layers_[j].records)
      if (subsumes(r.clause, c)) {
        ++stats_.insertions_skipped;
        return;
      }

  if (cfg_.observer) cfg_.observer->insertion_started(i, c, origin);
  ensure_layer(i);
  if (origin == Origin::blocking) {
    for (std::size_t k = 0; k <= i && k < solvers_.size(); ++k) solvers_[k].add_clause(c.lits());
  } else if (i < solvers_.size()) {
    solvers_[i].add_clause(c.lits());
  }

  remove_subsumed(i, c);
  kill_covered_witnesses(i, c);
  reschedule_covered_obligations(i, c);
  auto& layer = frames_.layers_[i];
  layer.records.push_back({next_record_id_++, c, std::nullopt});
  ++layer.pending;
  if (cfg_.observer && cfg_.mode == Mode::triggered)
    cfg_.observer->request_filed(i, layer.records.back(), RequestCause::new_clause, c, nullptr);

  if (origin == Origin::blocking) {
    for (std::size_t j = i - 1; j >= 1; --j) {
      auto& lower = frames_.layers_[j];
      // A clause of Δ_j subsuming c was itself cascaded when it arrived, so
      // nothing below j needs cleaning.  An identical copy is dropped first.
      const auto found = std::find_if(lower.records.begin(), lower.records.end(),
                                      [&](const ClauseRecord& r) { return subsumes(r.clause, c); });
      if (found != lower.records.end() && found->clause.size() < c.size()) break;
      const bool stop = found != lower.records.end();
      const bool had_records = !lower.records.empty();
      remove_subsumed(j, c);
      kill_covered_witnesses(j, c);
      if (had_records && lower.records.empty()) emptied_.push_back(j);
      if (stop) break;
    }
  }
  if (cfg_.observer) cfg_.observer->insertion_done(frames_, i, c, origin);
}

// --- convergence ------------------------------------------------------------------

std::optional<std::vector<Clause>> Engine::try_candidate(std::size_t j) {
  if (j < 1 || j >= frames_.layers_.size() || !frames_.layers_[j].records.empty()) return std::nullopt;
  std::vector<Clause> phi = frames_.clauses_from(j + 1);
  VerifyResult v = verify_invariant(enc_, phi);
  stats_.sat_verify += v.solves;
  if (!v) return std::nullopt;
  return phi;
}

std::optional<std::vector<Clause>> Engine::detect_convergence() {
  std::vector<std::size_t> pending;
  pending.swap(emptied_);
  std::sort(pending.begin(), pending.end());
  pending.erase(std::unique(pending.begin(), pending.end()), pending.end());
  for (std::size_t j : pending)
    if (auto phi = try_candidate(j)) return phi;
  return std::nullopt;
}

std::optional<std::vector<Clause>> Engine::detect_convergence_all() {
  emptied_.clear();
  for (std::size_t j = 1; j <= frames_.frontier_ + 1; ++j)
    if (auto phi = try_candidate(j)) return phi;
  return std::nullopt;
}

aiger::Trace Engine::reconstruct_trace(std::size_t id) const {
  aiger::Trace trace;
  trace.initial = obligations_.at(id).state;
  std::size_t cur = id;
  while (obligations_[cur].successor) {
    trace.steps.push_back(obligations_[cur].inputs);
    cur = *obligations_[cur].successor;
  }
  trace.final_inputs = obligations_[cur].inputs;
  if (cfg_.debug_checks) {
    State s = trace.initial;
    std::size_t at = id;
    for (const auto& step : trace.steps) {
      s = aiger::simulate_step(sys_, s, step);
      at = *obligations_[at].successor;
      if (!(s == obligations_[at].state)) throw std::logic_error("obligation chain does not follow the transition relation");
    }
  }
  return trace;
}

// --- main loops -------------------------------------------------------------------

void Engine::on_quiescence() {
  if (cfg_.debug_checks) check_invariants();
  if (cfg_.observer) cfg_.observer->quiescent(frames_);
}

void Engine::check_invariants() const {
  const auto& layers = frames_.layers_;
  for (std::size_t i = 1; i < layers.size(); ++i) {
    const auto& recs = layers[i].records;
    for (std::size_t a = 0; a < recs.size(); ++a)
      for (std::size_t b = 0; b < recs.size(); ++b)
        if (a != b && subsumes(recs[a].clause, recs[b].clause))
          throw std::logic_error("redundant clause in delta layer " + std::to_string(i));
    if (cfg_.mode != Mode::triggered || i > frames_.frontier_) continue;
    const auto layer_clauses = frames_.clauses_from(i);
    for (const auto& r : recs) {
      if (!r.witness) throw std::logic_error("pending push request at quiescence");
      for (const auto& c : layer_clauses)
        if (clause_covers_state(c, r.witness->state))
          throw std::logic_error("witness of " + to_string(r.clause) + " is covered by " + to_string(c));
      State next = aiger::simulate_step(sys_, r.witness->state, r.witness->inputs);
      if (!clause_covers_state(r.clause, next))
        throw std::logic_error("witness successor satisfies " + to_string(r.clause));
    }
  }
}

CheckOutcome Engine::finish_safe(std::vector<Clause> invariant) {
  if (cfg_.verify_certificates) {
    VerifyResult v = verify_invariant(enc_, invariant);
    stats_.sat_verify += v.solves;
    if (!v) throw std::logic_error("internal error: invariant failed the " + v.failed_check + " check");
  }
  return {Safe{std::move(invariant)}, stats_};
}

CheckOutcome Engine::finish_unsafe() {
  if (cfg_.verify_certificates && !aiger::replay(sys_, *cex_))
    throw std::logic_error("internal error: counterexample does not replay");
  return {Unsafe{*cex_}, stats_};
}

CheckOutcome Engine::finish_unknown(std::string reason) { return {ResourceOut{std::move(reason)}, stats_}; }

CheckOutcome Engine::run_scheduled() {
  for (;;) {
    if (cex_) return finish_unsafe();
    if (auto phi = detect_convergence()) return finish_safe(std::move(*phi));

    bool worked = false;
    for (std::size_t i = 0; i <= frames_.frontier_ && !worked; ++i) {
      auto& layer = frames_.layers_[i];
      if (!layer.obligations.empty()) {
        handle_obligation(layer.obligations.back());
        worked = true;
      } else if (cfg_.mode == Mode::triggered && layer.pending > 0) {
        auto it = std::find_if(layer.records.begin(), layer.records.end(),
                               [](const ClauseRecord& r) { return r.push_pending(); });
        handle_push_request(i, static_cast<std::size_t>(it - layer.records.begin()));
        worked = true;
      }
    }
    if (worked) continue;

    on_quiescence();
    if (auto bad = get_bad_state(frames_.frontier_)) {
      obligations_.clear();
      add_obligation(std::move(bad->state), frames_.frontier_, std::nullopt, std::move(bad->inputs));
      continue;
    }
    if (auto phi = detect_convergence_all()) return finish_safe(std::move(*phi));
    if (frames_.frontier_ + 1 > cfg_.max_frames) return finish_unknown("frame limit reached");
    advance_frontier();
  }
}

CheckOutcome Engine::run_iteration() {
  for (;;) {
    while (auto bad = get_bad_state(frames_.frontier_)) {
      obligations_.clear();
      add_obligation(std::move(bad->state), frames_.frontier_, std::nullopt, std::move(bad->inputs));
      for (;;) {
        std::size_t i = 0;
        while (i <= frames_.frontier_ && frames_.layers_[i].obligations.empty()) ++i;
        if (i > frames_.frontier_) break;
        handle_obligation(frames_.layers_[i].obligations.back());
        if (cex_) return finish_unsafe();
      }
    }
    on_quiescence();

    for (std::size_t i = 1; i <= frames_.frontier_; ++i) {
      std::vector<std::uint64_t> ids;
      for (const auto& r : frames_.layers_[i].records) ids.push_back(r.id);
      for (std::uint64_t id : ids) {
        auto& records = frames_.layers_[i].records;
        auto it = std::find_if(records.begin(), records.end(), [id](const ClauseRecord& r) { return r.id == id; });
        if (it == records.end()) continue;
        const Clause c = it->clause;
        sat::Result r = query(i, encoder::prime_cube(enc_, negate(c)), QueryKind::push);
        if (r.is_sat()) continue;
        if (it->push_pending()) --frames_.layers_[i].pending;
        records.erase(it);
        ++stats_.clauses_pushed;
        add_clause_cascade(c, i + 1, Origin::push);
      }
      if (auto phi = try_candidate(i)) return finish_safe(std::move(*phi));
    }
    if (auto phi = detect_convergence_all()) return finish_safe(std::move(*phi));
    if (frames_.frontier_ + 1 > cfg_.max_frames) return finish_unknown("frame limit reached");
    advance_frontier();
  }
}

CheckOutcome Engine::run() {
  try {
    return cfg_.mode == Mode::iteration ? run_iteration() : run_scheduled();
  } catch (const ResourceExhausted&) {
    return finish_unknown("SAT step limit reached");
  }
}

CheckOutcome check(const aiger::TransitionSystem& sys, const encoder::EncodedSystem& enc, const EngineConfig& cfg) {
  Engine engine(sys, enc, cfg);
  return engine.run();
}

CheckOutcome check(const aiger::TransitionSystem& sys, const EngineConfig& cfg) {
  const auto enc = encoder::encode(sys);
  return check(sys, enc, cfg);
}

}  // namespace pushd::ic3
