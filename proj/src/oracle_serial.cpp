#include <algorithm>
#include <deque>
#include <optional>

#include "oracle_detail.hpp"

namespace pushd::oracle {

namespace {
constexpr std::size_t kLatchCap = 28;
constexpr std::size_t kInputCap = 24;
}  // namespace

bool exceeds(const aiger::TransitionSystem& sys, const Limits& limits) {
  return sys.latches.size() > std::min(limits.max_latches, kLatchCap) ||
         sys.inputs.size() > std::min(limits.max_inputs, kInputCap);
}

aiger::Step step_from_index(const aiger::TransitionSystem& sys, std::uint64_t valuation) {
  aiger::Step st;
  st.values.resize(sys.inputs.size());
  for (std::size_t k = 0; k < sys.inputs.size(); ++k) st.values[k] = (valuation >> k) & 1u;
  return st;
}

State state_from_packed(const aiger::TransitionSystem& sys, PackedState s) {
  std::vector<bool> bits(sys.latches.size());
  for (std::size_t k = 0; k < bits.size(); ++k) bits[k] = (s >> k) & 1u;
  return aiger::make_state(sys, bits);
}

namespace {

PackedState pack(const aiger::TransitionSystem& sys, const State& s) {
  const auto bits = aiger::latch_values(sys, s);
  PackedState p = 0;
  for (std::size_t k = 0; k < bits.size(); ++k)
    if (bits[k]) p |= PackedState{1} << k;
  return p;
}

}  // namespace

aiger::Trace build_trace(const aiger::TransitionSystem& sys, PackedState last, std::uint64_t final_input,
                         const std::vector<PackedState>& parent, const std::vector<std::uint32_t>& parent_input) {
  aiger::Trace t;
  std::vector<aiger::Step> rev;
  for (PackedState s = last; s != 0; s = parent[s]) rev.push_back(step_from_index(sys, parent_input[s]));
  t.initial = aiger::initial_state(sys);
  t.steps.assign(rev.rbegin(), rev.rend());
  t.final_inputs = step_from_index(sys, final_input);
  return t;
}

OracleResult bfs_check_serial(const aiger::TransitionSystem& sys, Limits limits) {
  if (exceeds(sys, limits)) return TooLarge{};
  const std::size_t n_states = std::size_t{1} << sys.latches.size();
  const std::uint64_t n_inputs = std::uint64_t{1} << sys.inputs.size();

  std::vector<std::uint8_t> seen(n_states, 0);
  std::vector<PackedState> parent(n_states, 0);
  std::vector<std::uint32_t> parent_input(n_states, 0);
  std::deque<PackedState> queue{0};
  seen[0] = 1;
  std::size_t count = 1;

  while (!queue.empty()) {
    const PackedState s = queue.front();
    queue.pop_front();
    const State st = state_from_packed(sys, s);
    for (std::uint64_t in = 0; in < n_inputs; ++in) {
      const aiger::Step step = step_from_index(sys, in);
      if (aiger::eval_bad(sys, st, step)) return Unsafe{build_trace(sys, s, in, parent, parent_input)};
    }
    for (std::uint64_t in = 0; in < n_inputs; ++in) {
      const PackedState t = pack(sys, aiger::simulate_step(sys, st, step_from_index(sys, in)));
      if (seen[t]) continue;
      seen[t] = 1;
      parent[t] = s;
      parent_input[t] = static_cast<std::uint32_t>(in);
      queue.push_back(t);
      ++count;
    }
  }
  return Safe{count};
}

}  // namespace pushd::oracle
