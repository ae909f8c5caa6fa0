#include "pushd/encoder.hpp"

#include <ostream>
#include <stdexcept>

#include "pushd/sat.hpp"

namespace pushd::encoder {

Var EncodedSystem::prime(Var v) const {
  if (v >= prime_of.size() || prime_of[v] < 0)
    throw std::out_of_range("x" + std::to_string(v) + " has no next-state copy");
  return static_cast<Var>(prime_of[v]);
}

std::optional<Var> EncodedSystem::unprime(Var v) const {
  if (v >= unprime_of.size() || unprime_of[v] < 0) return std::nullopt;
  return static_cast<Var>(unprime_of[v]);
}

namespace {

// Drops tautologies such as the negative clause of g = a & ~a.
void emit(std::vector<Clause>& out, std::vector<Lit> lits) {
  for (std::size_t i = 0; i < lits.size(); ++i)
    for (std::size_t j = i + 1; j < lits.size(); ++j)
      if (lits[i] == ~lits[j]) return;
  out.emplace_back(std::move(lits));
}

}  // namespace

EncodedSystem encode(const aiger::TransitionSystem& sys) {
  EncodedSystem enc;
  const std::size_t n = sys.max_var + 1;
  enc.var_count = n + sys.latches.size();
  enc.prime_of.assign(enc.var_count, -1);
  enc.unprime_of.assign(enc.var_count, -1);
  enc.constant_clause = Clause{Lit::neg(0)};
  enc.bad_literal = sys.bad;
  for (Lit in : sys.inputs) enc.input_vars.push_back(in.var());

  for (std::size_t i = 0; i < sys.latches.size(); ++i) {
    Var v = sys.latches[i].lit.var();
    Var p = static_cast<Var>(n + i);
    enc.latch_vars.push_back(v);
    enc.prime_of[v] = p;
    enc.unprime_of[p] = v;
    enc.init_clauses.push_back(Clause{Lit::neg(v)});
  }

  // Polarity in which each variable's definition is needed.
  std::vector<std::uint8_t> need_pos(n, 0), need_neg(n, 0);
  auto mark = [&](Lit l, bool positive) {
    if (positive != l.negated())
      need_pos[l.var()] = 1;
    else
      need_neg[l.var()] = 1;
  };
  mark(sys.bad, true);
  for (const auto& l : sys.latches) {
    mark(l.next, true);
    mark(l.next, false);
  }
  for (auto g = sys.gates.rbegin(); g != sys.gates.rend(); ++g) {
    Var v = g->lhs.var();
    if (need_pos[v]) {
      mark(g->rhs0, true);
      mark(g->rhs1, true);
    }
    if (need_neg[v]) {
      mark(g->rhs0, false);
      mark(g->rhs1, false);
    }
  }

  for (const auto& g : sys.gates) {
    Var v = g.lhs.var();
    if (need_pos[v]) {
      emit(enc.trans_clauses, {Lit::neg(v), g.rhs0});
      emit(enc.trans_clauses, {Lit::neg(v), g.rhs1});
    }
    if (need_neg[v]) emit(enc.trans_clauses, {Lit::pos(v), ~g.rhs0, ~g.rhs1});
  }
  for (std::size_t i = 0; i < sys.latches.size(); ++i) {
    Var p = static_cast<Var>(n + i);
    Lit next = sys.latches[i].next;
    emit(enc.trans_clauses, {Lit::neg(p), next});
    emit(enc.trans_clauses, {Lit::pos(p), ~next});
  }
  return enc;
}

std::vector<Lit> prime_cube(const EncodedSystem& enc, const Cube& c) {
  std::vector<Lit> out;
  out.reserve(c.size());
  for (Lit l : c) out.emplace_back(enc.prime(l.var()), l.negated());
  return out;
}

Cube unprime_cube(const EncodedSystem& enc, std::span<const Lit> primed) {
  std::vector<Lit> out;
  out.reserve(primed.size());
  for (Lit l : primed) {
    auto v = enc.unprime(l.var());
    if (!v) throw std::out_of_range("x" + std::to_string(l.var()) + " is not a next-state variable");
    out.emplace_back(*v, l.negated());
  }
  return Cube(std::move(out));
}

void load_transition(sat::Solver& solver, const EncodedSystem& enc) {
  solver.ensure_vars(enc.var_count);
  solver.add_clause(enc.constant_clause.lits());
  for (const auto& c : enc.trans_clauses) solver.add_clause(c.lits());
}

void load_init(sat::Solver& solver, const EncodedSystem& enc) {
  solver.ensure_vars(enc.var_count);
  for (const auto& c : enc.init_clauses) solver.add_clause(c.lits());
}

void write_dimacs(std::ostream& os, const EncodedSystem& enc) {
  os << "c transition relation; DIMACS variable v+1 is solver variable v\n";
  for (Var v : enc.latch_vars) os << "c latch " << v + 1 << " next " << enc.prime(v) + 1 << '\n';
  for (Var v : enc.input_vars) os << "c input " << v + 1 << '\n';
  os << "c bad " << (enc.bad_literal.negated() ? "-" : "") << enc.bad_literal.var() + 1 << '\n';
  os << "p cnf " << enc.var_count << ' ' << enc.trans_clauses.size() + 1 << '\n';
  auto put = [&](const Clause& c) {
    for (Lit l : c) os << (l.negated() ? "-" : "") << l.var() + 1 << ' ';
    os << "0\n";
  };
  put(enc.constant_clause);
  for (const auto& c : enc.trans_clauses) put(c);
}

}  // namespace pushd::encoder
