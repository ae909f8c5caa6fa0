#pragma once

// Embedded incremental CDCL solver with assumptions.
//
// Unsat answers under assumptions report the subset of assumptions that took
// part in the final conflict.  Decisions always pick the negative phase, so a
// variable that search leaves free reads as false in the model.

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

#include "pushd/logic.hpp"

namespace pushd::sat {

enum class Status : std::uint8_t { sat, unsat, resource_out };

struct Options {
  std::uint64_t seed = 0;            // 0: no activity jitter
  std::uint64_t conflict_limit = 0;  // per solve call; 0: unlimited
  bool check_used = false;           // re-solve every Unsat under its used set
};

class Result {
 public:
  Status status() const { return status_; }
  bool is_sat() const { return status_ == Status::sat; }
  bool is_unsat() const { return status_ == Status::unsat; }

  /// Throws std::logic_error unless the result is Sat.
  bool model_value(Var v) const;
  bool model_value(Lit l) const { return model_value(l.var()) != l.negated(); }
  /// Assumptions used in the refutation; throws unless the result is Unsat.
  std::span<const Lit> used() const;

 private:
  friend class Solver;
  Status status_ = Status::resource_out;
  std::vector<std::uint8_t> model_;
  std::vector<Lit> used_;
};

struct Stats {
  std::uint64_t solves = 0;
  std::uint64_t conflicts = 0;
  std::uint64_t decisions = 0;
  std::uint64_t propagations = 0;
};

class Solver {
 public:
  explicit Solver(Options opts = {});

  Var new_var();
  void ensure_vars(std::size_t n);
  std::size_t num_vars() const { return assigns_.size(); }

  /// Permanently adds a clause. The empty clause (or a clause falsified at the
  /// root) makes the instance unsatisfiable for good.
  void add_clause(std::span<const Lit> lits);
  void add_clause(std::initializer_list<Lit> lits) { add_clause(std::span<const Lit>(lits.begin(), lits.size())); }

  /// Throws std::invalid_argument if the assumptions contain l and ¬l or
  /// mention unallocated variables.
  Result solve(std::span<const Lit> assumptions = {});
  Result solve(std::initializer_list<Lit> assumptions) {
    return solve(std::span<const Lit>(assumptions.begin(), assumptions.size()));
  }

  bool okay() const { return ok_; }
  const Stats& stats() const { return stats_; }
  void set_conflict_limit(std::uint64_t limit) { opts_.conflict_limit = limit; }

 private:
  using CRef = std::uint32_t;
  static constexpr CRef kNoReason = 0xffffffffu;
  static constexpr std::uint8_t kFalse = 0, kTrue = 1, kUndef = 2;

  struct ClauseData {
    std::vector<Lit> lits;
    double activity = 0;
    bool learnt = false;
    bool deleted = false;
  };
  struct Watcher {
    CRef cref;
    Lit blocker;
  };

  // Max-heap of unassigned variables by activity, ties to the lower index.
  class VarOrder {
   public:
    using Activity = std::vector<double>;
    void grow(std::size_t n) { index_.resize(n, -1); }
    bool contains(Var v) const { return index_[v] >= 0; }
    bool empty() const { return heap_.empty(); }
    void insert(Var v, const Activity& act);
    void increased(Var v, const Activity& act) { up(index_[v], act); }
    Var pop(const Activity& act);

   private:
    static bool before(Var a, Var b, const Activity& act) {
      return act[a] > act[b] || (act[a] == act[b] && a < b);
    }
    void up(int i, const Activity& act);
    void down(int i, const Activity& act);
    std::vector<Var> heap_;
    std::vector<int> index_;
  };

  std::uint8_t value(Lit l) const {
    std::uint8_t a = assigns_[l.var()];
    return a == kUndef ? kUndef : static_cast<std::uint8_t>(a ^ static_cast<std::uint8_t>(l.negated()));
  }
  int decision_level() const { return static_cast<int>(trail_lim_.size()); }

  void enqueue(Lit l, CRef reason);
  CRef propagate();
  void analyze(CRef confl, std::vector<Lit>& learnt, int& bt_level);
  void analyze_final(Lit p, std::vector<Lit>& used);
  void cancel_until(int level);
  Lit pick_branch();
  Status search(std::span<const Lit> assumptions, std::uint64_t conflicts_allowed, std::vector<Lit>& used);
  void attach(CRef cr);
  void detach(CRef cr);
  void reduce_learnts();
  bool locked(CRef cr) const;
  void bump_var(Var v);
  void bump_clause(ClauseData& c);

  Options opts_;
  std::mt19937_64 rng_;
  bool ok_ = true;
  Stats stats_;

  std::vector<std::uint8_t> assigns_;
  std::vector<int> level_;
  std::vector<CRef> reason_;
  std::vector<std::uint8_t> seen_;
  std::vector<double> activity_;
  VarOrder order_;
  double var_inc_ = 1.0;
  double cla_inc_ = 1.0;

  std::vector<ClauseData> db_;
  std::vector<CRef> learnts_;
  std::size_t num_original_ = 0;
  double max_learnts_ = 0;
  std::vector<std::vector<Watcher>> watches_;

  std::vector<Lit> trail_;
  std::vector<std::size_t> trail_lim_;
  std::size_t qhead_ = 0;
  bool checking_used_ = false;
};

}  // namespace pushd::sat
