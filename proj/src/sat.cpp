#include "pushd/sat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace pushd::sat {

namespace {

constexpr double kVarDecay = 0.95;
constexpr double kClauseDecay = 0.999;
constexpr std::uint64_t kRestartBase = 100;

// Luby sequence value for restart number x, scaled by base y.
double luby(double y, std::uint64_t x) {
  std::uint64_t size = 1;
  int seq = 0;
  while (size < x + 1) {
    ++seq;
    size = 2 * size + 1;
  }
  while (size - 1 != x) {
    size = (size - 1) >> 1;
    --seq;
    x = x % size;
  }
  return std::pow(y, seq);
}

}  // namespace

bool Result::model_value(Var v) const {
  if (status_ != Status::sat) throw std::logic_error("model queried on a non-Sat result");
  if (v >= model_.size()) throw std::out_of_range("x" + std::to_string(v) + " is not allocated");
  return model_[v] != 0;
}

std::span<const Lit> Result::used() const {
  if (status_ != Status::unsat) throw std::logic_error("used assumptions queried on a non-Unsat result");
  return used_;
}

// --- variable order ---------------------------------------------------------

void Solver::VarOrder::insert(Var v, const Activity& act) {
  if (contains(v)) return;
  index_[v] = static_cast<int>(heap_.size());
  heap_.push_back(v);
  up(index_[v], act);
}

Var Solver::VarOrder::pop(const Activity& act) {
  Var top = heap_.front();
  heap_.front() = heap_.back();
  index_[heap_.front()] = 0;
  heap_.pop_back();
  index_[top] = -1;
  if (!heap_.empty()) down(0, act);
  return top;
}

void Solver::VarOrder::up(int i, const Activity& act) {
  Var v = heap_[i];
  while (i > 0) {
    int parent = (i - 1) / 2;
    if (!before(v, heap_[parent], act)) break;
    heap_[i] = heap_[parent];
    index_[heap_[i]] = i;
    i = parent;
  }
  heap_[i] = v;
  index_[v] = i;
}

void Solver::VarOrder::down(int i, const Activity& act) {
  Var v = heap_[i];
  const int n = static_cast<int>(heap_.size());
  for (;;) {
    int child = 2 * i + 1;
    if (child >= n) break;
    if (child + 1 < n && before(heap_[child + 1], heap_[child], act)) ++child;
    if (!before(heap_[child], v, act)) break;
    heap_[i] = heap_[child];
    index_[heap_[i]] = i;
    i = child;
  }
  heap_[i] = v;
  index_[v] = i;
}

// --- construction -----------------------------------------------------------

Solver::Solver(Options opts) : opts_(opts), rng_(opts.seed) {}

Var Solver::new_var() {
  Var v = static_cast<Var>(assigns_.size());
  assigns_.push_back(kUndef);
  level_.push_back(0);
  reason_.push_back(kNoReason);
  seen_.push_back(0);
  activity_.push_back(opts_.seed ? std::uniform_real_distribution<double>(0, 1e-5)(rng_) : 0.0);
  watches_.resize(2 * assigns_.size());
  order_.grow(assigns_.size());
  order_.insert(v, activity_);
  return v;
}

void Solver::ensure_vars(std::size_t n) {
  while (assigns_.size() < n) new_var();
}

void Solver::attach(CRef cr) {
  const auto& c = db_[cr].lits;
  watches_[c[0].code()].push_back({cr, c[1]});
  watches_[c[1].code()].push_back({cr, c[0]});
}

void Solver::detach(CRef cr) {
  const auto& c = db_[cr].lits;
  for (int k = 0; k < 2; ++k) {
    auto& ws = watches_[c[k].code()];
    auto it = std::find_if(ws.begin(), ws.end(), [cr](const Watcher& w) { return w.cref == cr; });
    if (it != ws.end()) ws.erase(it);
  }
}

void Solver::add_clause(std::span<const Lit> lits) {
  if (!ok_) return;
  cancel_until(0);
  std::vector<Lit> c(lits.begin(), lits.end());
  for (Lit l : c)
    if (l.var() >= num_vars()) throw std::invalid_argument("clause mentions unallocated variable x" + std::to_string(l.var()));
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  std::size_t j = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (value(c[i]) == kTrue || (i + 1 < c.size() && c[i + 1] == ~c[i])) return;  // satisfied or tautology
    if (value(c[i]) != kFalse) c[j++] = c[i];
  }
  c.resize(j);
  if (c.empty()) {
    ok_ = false;
    return;
  }
  if (c.size() == 1) {
    enqueue(c[0], kNoReason);
    if (propagate() != kNoReason) ok_ = false;
    return;
  }
  CRef cr = static_cast<CRef>(db_.size());
  db_.push_back({std::move(c), 0.0, false, false});
  ++num_original_;
  attach(cr);
}

// --- search -----------------------------------------------------------------

void Solver::enqueue(Lit l, CRef reason) {
  assigns_[l.var()] = l.negated() ? kFalse : kTrue;
  level_[l.var()] = decision_level();
  reason_[l.var()] = reason;
  trail_.push_back(l);
}

Solver::CRef Solver::propagate() {
  CRef confl = kNoReason;
  while (qhead_ < trail_.size()) {
    Lit p = trail_[qhead_++];
    Lit false_lit = ~p;
    auto& ws = watches_[false_lit.code()];
    ++stats_.propagations;
    std::size_t i = 0, j = 0;
    while (i < ws.size()) {
      Watcher w = ws[i++];
      if (value(w.blocker) == kTrue) {
        ws[j++] = w;
        continue;
      }
      auto& c = db_[w.cref].lits;
      if (c[0] == false_lit) std::swap(c[0], c[1]);
      Lit first = c[0];
      if (first != w.blocker && value(first) == kTrue) {
        ws[j++] = {w.cref, first};
        continue;
      }
      bool moved = false;
      for (std::size_t k = 2; k < c.size(); ++k) {
        if (value(c[k]) != kFalse) {
          std::swap(c[1], c[k]);
          watches_[c[1].code()].push_back({w.cref, first});
          moved = true;
          break;
        }
      }
      if (moved) continue;
      ws[j++] = {w.cref, first};
      if (value(first) == kFalse) {
        confl = w.cref;
        qhead_ = trail_.size();
        while (i < ws.size()) ws[j++] = ws[i++];
      } else {
        enqueue(first, w.cref);
      }
    }
    ws.resize(j);
    if (confl != kNoReason) break;
  }
  return confl;
}

void Solver::bump_var(Var v) {
  if ((activity_[v] += var_inc_) > 1e100) {
    for (auto& a : activity_) a *= 1e-100;
    var_inc_ *= 1e-100;
  }
  if (order_.contains(v)) order_.increased(v, activity_);
}

void Solver::bump_clause(ClauseData& c) {
  if ((c.activity += cla_inc_) > 1e20) {
    for (CRef cr : learnts_) db_[cr].activity *= 1e-20;
    cla_inc_ *= 1e-20;
  }
}

void Solver::analyze(CRef confl, std::vector<Lit>& learnt, int& bt_level) {
  learnt.assign(1, Lit());
  int path = 0;
  bool have_p = false;
  Lit p;
  std::size_t index = trail_.size();
  do {
    auto& c = db_[confl];
    if (c.learnt) bump_clause(c);
    for (std::size_t k = have_p ? 1 : 0; k < c.lits.size(); ++k) {
      Lit q = c.lits[k];
      Var v = q.var();
      if (!seen_[v] && level_[v] > 0) {
        bump_var(v);
        seen_[v] = 1;
        if (level_[v] >= decision_level())
          ++path;
        else
          learnt.push_back(q);
      }
    }
    while (!seen_[trail_[--index].var()]) {
    }
    p = trail_[index];
    have_p = true;
    confl = reason_[p.var()];
    seen_[p.var()] = 0;
    --path;
  } while (path > 0);
  learnt[0] = ~p;

  // Drop literals implied by the rest of the clause through their reason.
  std::vector<Lit> kept{learnt[0]};
  for (std::size_t k = 1; k < learnt.size(); ++k) {
    CRef r = reason_[learnt[k].var()];
    bool redundant = r != kNoReason;
    if (redundant) {
      for (std::size_t m = 1; m < db_[r].lits.size(); ++m) {
        Var u = db_[r].lits[m].var();
        if (!seen_[u] && level_[u] > 0) {
          redundant = false;
          break;
        }
      }
    }
    if (!redundant) kept.push_back(learnt[k]);
  }
  for (std::size_t k = 1; k < learnt.size(); ++k) seen_[learnt[k].var()] = 0;
  learnt.swap(kept);

  bt_level = 0;
  if (learnt.size() > 1) {
    std::size_t max_i = 1;
    for (std::size_t k = 2; k < learnt.size(); ++k)
      if (level_[learnt[k].var()] > level_[learnt[max_i].var()]) max_i = k;
    std::swap(learnt[1], learnt[max_i]);
    bt_level = level_[learnt[1].var()];
  }
}

// p is the negation of a failed assumption; collects the assumptions the
// falsification depends on.
void Solver::analyze_final(Lit p, std::vector<Lit>& used) {
  used.assign(1, ~p);
  if (decision_level() == 0) return;
  seen_[p.var()] = 1;
  for (std::size_t i = trail_.size(); i-- > trail_lim_[0];) {
    Var x = trail_[i].var();
    if (!seen_[x]) continue;
    if (reason_[x] == kNoReason) {
      used.push_back(trail_[i]);
    } else {
      const auto& c = db_[reason_[x]].lits;
      for (std::size_t k = 1; k < c.size(); ++k)
        if (level_[c[k].var()] > 0) seen_[c[k].var()] = 1;
    }
    seen_[x] = 0;
  }
  seen_[p.var()] = 0;
}

void Solver::cancel_until(int level) {
  if (decision_level() <= level) return;
  for (std::size_t i = trail_.size(); i-- > trail_lim_[level];) {
    Var v = trail_[i].var();
    assigns_[v] = kUndef;
    reason_[v] = kNoReason;
    order_.insert(v, activity_);
  }
  trail_.resize(trail_lim_[level]);
  trail_lim_.resize(level);
  qhead_ = trail_.size();
}

Lit Solver::pick_branch() {
  while (!order_.empty()) {
    Var v = order_.pop(activity_);
    if (assigns_[v] == kUndef) return Lit::neg(v);
  }
  return Lit(0xffffffffu);
}

bool Solver::locked(CRef cr) const {
  Lit first = db_[cr].lits[0];
  return reason_[first.var()] == cr && value(first) == kTrue;
}

void Solver::reduce_learnts() {
  std::sort(learnts_.begin(), learnts_.end(),
            [this](CRef a, CRef b) { return db_[a].activity < db_[b].activity; });
  std::vector<CRef> keep;
  const std::size_t half = learnts_.size() / 2;
  for (std::size_t i = 0; i < learnts_.size(); ++i) {
    CRef cr = learnts_[i];
    if (i < half && db_[cr].lits.size() > 2 && !locked(cr)) {
      detach(cr);
      db_[cr].deleted = true;
      db_[cr].lits.clear();
      db_[cr].lits.shrink_to_fit();
    } else {
      keep.push_back(cr);
    }
  }
  learnts_.swap(keep);
}

Status Solver::search(std::span<const Lit> assumptions, std::uint64_t conflicts_allowed, std::vector<Lit>& used) {
  std::uint64_t local_conflicts = 0;
  std::vector<Lit> learnt;
  for (;;) {
    CRef confl = propagate();
    if (confl != kNoReason) {
      ++stats_.conflicts;
      ++local_conflicts;
      if (decision_level() == 0) {
        ok_ = false;
        used.clear();
        return Status::unsat;
      }
      int bt = 0;
      analyze(confl, learnt, bt);
      cancel_until(bt);
      if (learnt.size() == 1) {
        enqueue(learnt[0], kNoReason);
      } else {
        CRef cr = static_cast<CRef>(db_.size());
        db_.push_back({learnt, 0.0, true, false});
        learnts_.push_back(cr);
        attach(cr);
        bump_clause(db_[cr]);
        enqueue(learnt[0], cr);
      }
      var_inc_ /= kVarDecay;
      cla_inc_ /= kClauseDecay;
      continue;
    }
    if (local_conflicts >= conflicts_allowed) {
      cancel_until(0);
      return Status::resource_out;  // restart (or budget) signal to the caller
    }
    if (static_cast<double>(learnts_.size()) - static_cast<double>(trail_.size()) >= max_learnts_) {
      reduce_learnts();
      max_learnts_ *= 1.1;
    }

    bool have_next = false;
    Lit next;
    while (decision_level() < static_cast<int>(assumptions.size())) {
      Lit a = assumptions[decision_level()];
      if (value(a) == kTrue) {
        trail_lim_.push_back(trail_.size());
      } else if (value(a) == kFalse) {
        analyze_final(~a, used);
        return Status::unsat;
      } else {
        next = a;
        have_next = true;
        break;
      }
    }
    if (!have_next) {
      next = pick_branch();
      if (next.code() == 0xffffffffu) return Status::sat;
      ++stats_.decisions;
    }
    trail_lim_.push_back(trail_.size());
    enqueue(next, kNoReason);
  }
}

Result Solver::solve(std::span<const Lit> assumptions) {
  ++stats_.solves;
  for (Lit a : assumptions) {
    if (a.var() >= num_vars()) throw std::invalid_argument("assumption on unallocated variable x" + std::to_string(a.var()));
    if (std::find(assumptions.begin(), assumptions.end(), ~a) != assumptions.end())
      throw std::invalid_argument("assumptions contain both polarities of x" + std::to_string(a.var()));
  }

  Result result;
  if (!ok_) {
    result.status_ = Status::unsat;
    return result;
  }
  cancel_until(0);
  max_learnts_ = std::max(max_learnts_, std::max(2000.0, static_cast<double>(num_original_) / 3.0));

  const std::uint64_t start = stats_.conflicts;
  const std::uint64_t budget =
      opts_.conflict_limit ? opts_.conflict_limit : std::numeric_limits<std::uint64_t>::max();
  Status status = Status::resource_out;
  std::vector<Lit> used;
  for (std::uint64_t restarts = 0;; ++restarts) {
    std::uint64_t spent = stats_.conflicts - start;
    if (spent >= budget) break;
    auto allowed = static_cast<std::uint64_t>(luby(2, restarts) * kRestartBase);
    allowed = std::min(allowed, budget - spent);
    status = search(assumptions, allowed, used);
    if (status != Status::resource_out) break;
  }

  result.status_ = status;
  if (status == Status::sat) {
    result.model_.resize(num_vars());
    for (Var v = 0; v < num_vars(); ++v) result.model_[v] = assigns_[v] == kTrue;
  } else if (status == Status::unsat) {
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    result.used_ = std::move(used);
  }
  cancel_until(0);

  if (opts_.check_used && status == Status::unsat && !assumptions.empty() && !checking_used_) {
    checking_used_ = true;
    Result again = solve(result.used_);
    checking_used_ = false;
    if (!again.is_unsat()) throw std::logic_error("used assumptions do not reproduce the Unsat answer");
  }
  return result;
}

}  // namespace pushd::sat
