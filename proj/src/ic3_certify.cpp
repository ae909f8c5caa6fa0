#include <stdexcept>

#include "pushd/ic3.hpp"

namespace pushd::ic3 {

namespace {

State latch_state(const encoder::EncodedSystem& enc, const sat::Result& r) {
  std::vector<Lit> lits;
  for (Var v : enc.latch_vars) lits.emplace_back(v, !r.model_value(v));
  return State(Cube(std::move(lits)));
}

VerifyResult failure(std::string check, std::optional<Clause> clause, std::optional<State> state,
                     std::uint64_t solves) {
  VerifyResult v;
  v.ok = false;
  v.failed_check = std::move(check);
  v.failed_clause = std::move(clause);
  v.violating_state = std::move(state);
  v.solves = solves;
  return v;
}

}  // namespace

VerifyResult verify_invariant(const encoder::EncodedSystem& enc, std::span<const Clause> phi) {
  std::uint64_t solves = 0;
  for (const auto& c : phi)
    for (Lit l : c)
      if (l.var() >= enc.prime_of.size() || enc.prime_of[l.var()] < 0)
        return failure("latch-only clauses", c, std::nullopt, solves);

  // I ∧ ¬φ: one query per clause, ¬c as assumptions.
  sat::Solver init;
  init.ensure_vars(enc.var_count);
  init.add_clause(enc.constant_clause.lits());
  encoder::load_init(init, enc);
  for (const auto& c : phi) {
    const Cube neg = negate(c);
    ++solves;
    auto r = init.solve(neg.lits());
    if (r.is_sat()) return failure("initiation", c, latch_state(enc, r), solves);
  }

  // φ ∧ T ∧ ¬φ′ and φ ∧ bad.
  sat::Solver step;
  encoder::load_transition(step, enc);
  for (const auto& c : phi) step.add_clause(c.lits());
  for (const auto& c : phi) {
    ++solves;
    auto r = step.solve(encoder::prime_cube(enc, negate(c)));
    if (r.is_sat()) return failure("consecution", c, latch_state(enc, r), solves);
  }
  ++solves;
  const Lit bad = enc.bad_literal;
  auto r = step.solve(std::span<const Lit>(&bad, 1));
  if (r.is_sat()) return failure("safety", std::nullopt, latch_state(enc, r), solves);

  VerifyResult ok;
  ok.solves = solves;
  return ok;
}

}  // namespace pushd::ic3
