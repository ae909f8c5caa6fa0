#include "pushd/logic.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace pushd {

std::string to_string(Lit l) {
  return (l.negated() ? "-x" : "x") + std::to_string(l.var());
}

std::uint64_t signature(std::span<const Lit> lits) {
  std::uint64_t sig = 0;
  for (Lit l : lits) sig |= std::uint64_t{1} << (l.var() % 64);
  return sig;
}

template <class Tag>
LitSet<Tag>::LitSet(std::vector<Lit> lits) : lits_(std::move(lits)) {
  std::sort(lits_.begin(), lits_.end());
  lits_.erase(std::unique(lits_.begin(), lits_.end()), lits_.end());
  for (std::size_t i = 1; i < lits_.size(); ++i)
    if (lits_[i].var() == lits_[i - 1].var())
      throw std::invalid_argument("literal set mentions x" + std::to_string(lits_[i].var()) +
                                  " in both polarities");
  sig_ = signature(lits_);
}

template <class Tag>
bool LitSet<Tag>::contains(Lit l) const {
  return std::binary_search(lits_.begin(), lits_.end(), l);
}

template class LitSet<detail::CubeTag>;
template class LitSet<detail::ClauseTag>;

bool State::value(Var v) const {
  auto lits = cube_.lits();
  auto it = std::lower_bound(lits.begin(), lits.end(), Lit::pos(v));
  if (it == lits.end() || it->var() != v)
    throw std::out_of_range("x" + std::to_string(v) + " is not a latch of this state");
  return !it->negated();
}

bool State::is_all_zero() const { return !has_positive_literal(cube_.lits()); }

namespace {
template <class To, class From>
To flip_all(const From& from) {
  std::vector<Lit> out;
  out.reserve(from.size());
  for (Lit l : from) out.push_back(~l);
  // Flipping the low bit keeps codes of distinct variables in the same order.
  return To(std::move(out));
}
}  // namespace

Clause negate(const Cube& c) { return flip_all<Clause>(c); }
Cube negate(const Clause& c) { return flip_all<Cube>(c); }

bool subsumes(const Clause& c, const Clause& d) {
  if (c.size() > d.size()) return false;
  if ((c.sig() & ~d.sig()) != 0) return false;
  auto a = c.lits();
  auto b = d.lits();
  std::size_t j = 0;
  for (Lit l : a) {
    while (j < b.size() && b[j] < l) ++j;
    if (j == b.size() || b[j] != l) return false;
    ++j;
  }
  return true;
}

bool clause_covers_state(const Clause& c, const State& w) {
  if ((c.sig() & ~w.cube().sig()) != 0) return false;
  auto s = w.cube().lits();
  std::size_t j = 0;
  for (Lit l : c) {
    while (j < s.size() && s[j].var() < l.var()) ++j;
    if (j == s.size() || s[j] != ~l) return false;
  }
  return true;
}

bool state_satisfies(const State& w, const Cube& cube) {
  auto s = w.cube().lits();
  std::size_t j = 0;
  for (Lit l : cube) {
    while (j < s.size() && s[j].var() < l.var()) ++j;
    if (j == s.size() || s[j] != l) return false;
  }
  return true;
}

bool has_positive_literal(std::span<const Lit> lits) {
  return std::any_of(lits.begin(), lits.end(), [](Lit l) { return !l.negated(); });
}

namespace {
template <class Set>
std::string join(const Set& set, const char* sep) {
  std::ostringstream os;
  bool first = true;
  for (Lit l : set) {
    if (!first) os << sep;
    os << to_string(l);
    first = false;
  }
  return os.str();
}
}  // namespace

std::string to_string(const Clause& c) { return "(" + join(c, " | ") + ")"; }
std::string to_string(const Cube& c) { return "[" + join(c, " & ") + "]"; }

}  // namespace pushd
