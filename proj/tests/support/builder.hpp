#pragma once

#include <random>
#include <string>
#include <vector>

#include "pushd/aiger.hpp"

namespace pushd::testkit {

// Builds circuits node by node and serializes them through the real parser,
// so every built system is also a parser test.
class AigBuilder {
 public:
  Lit input();
  Lit latch();
  void set_next(Lit latch, Lit next);
  Lit land(Lit a, Lit b);
  Lit lor(Lit a, Lit b) { return ~land(~a, ~b); }
  Lit lxor(Lit a, Lit b) { return lor(land(a, ~b), land(~a, b)); }
  Lit lconst(bool v) const { return Lit(v ? 1u : 0u); }
  void set_bad(Lit b) { bad_ = b; }

  std::string aag() const;
  aiger::TransitionSystem build() const;

 private:
  enum class Kind { input, latch, gate };
  struct Node {
    Kind kind;
    Lit a, b;  // gate operands or latch next
  };
  Lit map(Lit l, const std::vector<Var>& renum) const;
  std::vector<Node> nodes_;  // node k is builder variable k + 1
  Lit bad_;
};

struct Named {
  std::string name;
  aiger::TransitionSystem sys;
};

// The three small systems every module is tested against.
aiger::TransitionSystem toggle();          // next(l) = ¬l, bad = l
aiger::TransitionSystem latch_and_input();  // next(l) = l ∧ i, bad = l
aiger::TransitionSystem const_false();      // bad = 0
aiger::TransitionSystem counter(unsigned bits, unsigned bad_value, unsigned wrap = 0);

std::vector<Named> handcrafted_corpus();

struct RandomAigParams {
  unsigned max_latches = 8;
  unsigned max_inputs = 4;
  unsigned max_gates = 40;
};
aiger::TransitionSystem random_aig(std::mt19937_64& rng, const RandomAigParams& p = {});
std::vector<Named> random_corpus(std::size_t n, std::uint64_t seed, const RandomAigParams& p = {});

}  // namespace pushd::testkit
