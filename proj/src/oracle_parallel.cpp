#include <algorithm>
#include <bit>

#include <omp.h>

#include "oracle_detail.hpp"

namespace pushd::oracle {

namespace {

// Lane patterns for the six low input bits within a 64-valuation word.
constexpr std::uint64_t kLanePattern[6] = {
    0xAAAAAAAAAAAAAAAAull, 0xCCCCCCCCCCCCCCCCull, 0xF0F0F0F0F0F0F0F0ull,
    0xFF00FF00FF00FF00ull, 0xFFFF0000FFFF0000ull, 0xFFFFFFFF00000000ull,
};

// Successor slots per parallel chunk.
constexpr std::uint64_t kBufferSlots = std::uint64_t{1} << 20;

}  // namespace

PackedNetlist::PackedNetlist(const aiger::TransitionSystem& sys)
    : num_vars_(sys.max_var + 1), bad_lit_(sys.bad.code()) {
  for (const auto& l : sys.latches) {
    latch_vars_.push_back(l.lit.var());
    next_lits_.push_back(l.next.code());
  }
  for (Lit in : sys.inputs) input_vars_.push_back(in.var());
  for (const auto& g : sys.gates) gates_.push_back({g.lhs.var(), g.rhs0.code(), g.rhs1.code()});
}

void PackedNetlist::eval(PackedState s, std::uint64_t base, Lanes& out, std::vector<std::uint64_t>& val) const {
  val.assign(num_vars_, 0);
  for (std::size_t k = 0; k < latch_vars_.size(); ++k) val[latch_vars_[k]] = ((s >> k) & 1u) ? ~0ull : 0ull;
  for (std::size_t k = 0; k < input_vars_.size(); ++k) {
    if (k < 6)
      val[input_vars_[k]] = kLanePattern[k];
    else
      val[input_vars_[k]] = ((base >> k) & 1u) ? ~0ull : 0ull;
  }
  auto lit = [&](std::uint32_t code) { return val[code >> 1] ^ ((code & 1u) ? ~0ull : 0ull); };
  for (const auto& g : gates_) val[g.lhs] = lit(g.a) & lit(g.b);

  const std::uint64_t n = num_valuations();
  const std::uint64_t valid = n - base >= 64 ? ~0ull : (std::uint64_t{1} << (n - base)) - 1;
  out.bad = lit(bad_lit_) & valid;
  out.next.resize(next_lits_.size());
  for (std::size_t k = 0; k < next_lits_.size(); ++k) out.next[k] = lit(next_lits_[k]) & valid;
}

OracleResult bfs_check(const aiger::TransitionSystem& sys, Limits limits) {
  if (exceeds(sys, limits)) return TooLarge{};
  const PackedNetlist net(sys);
  const std::size_t n_states = std::size_t{1} << net.num_latches();
  const std::uint64_t n_inputs = net.num_valuations();
  const std::size_t n_words = static_cast<std::size_t>((n_inputs + 63) / 64);

  std::vector<std::uint8_t> seen(n_states, 0);
  std::vector<PackedState> parent(n_states, 0);
  std::vector<std::uint32_t> parent_input(n_states, 0);
  std::vector<PackedState> frontier{0}, next_frontier;
  seen[0] = 1;
  std::size_t count = 1;

  // Per chunk slot: first bad valuation (or -1) and successors in valuation order.
  const std::size_t chunk = static_cast<std::size_t>(std::max<std::uint64_t>(1, kBufferSlots / n_inputs));
  std::vector<std::int64_t> first_bad(chunk);
  std::vector<PackedState> succ(chunk * n_inputs);

  while (!frontier.empty()) {
    next_frontier.clear();
    for (std::size_t lo = 0; lo < frontier.size(); lo += chunk) {
      const std::size_t hi = std::min(frontier.size(), lo + chunk);
      const auto m = static_cast<std::ptrdiff_t>(hi - lo);

#pragma omp parallel
      {
        PackedNetlist::Lanes lanes;
        std::vector<std::uint64_t> scratch;
#pragma omp for schedule(dynamic, 16)
        for (std::ptrdiff_t idx = 0; idx < m; ++idx) {
          const PackedState s = frontier[lo + static_cast<std::size_t>(idx)];
          PackedState* out = &succ[static_cast<std::size_t>(idx) * n_inputs];
          first_bad[idx] = -1;
          for (std::size_t w = 0; w < n_words; ++w) {
            const std::uint64_t base = std::uint64_t{w} * 64;
            net.eval(s, base, lanes, scratch);
            if (lanes.bad != 0) {
              first_bad[idx] = static_cast<std::int64_t>(base + static_cast<unsigned>(std::countr_zero(lanes.bad)));
              break;
            }
            const std::uint64_t lanes_here = std::min<std::uint64_t>(64, n_inputs - base);
            for (std::uint64_t l = 0; l < lanes_here; ++l) {
              PackedState t = 0;
              for (std::size_t k = 0; k < lanes.next.size(); ++k) t |= static_cast<PackedState>((lanes.next[k] >> l) & 1u) << k;
              out[base + l] = t;
            }
          }
        }
      }

      // Serial merge keeps discovery order, and with it the parent links,
      // identical to the queue-based reference.
      for (std::size_t idx = 0; idx < hi - lo; ++idx) {
        const PackedState s = frontier[lo + idx];
        if (first_bad[idx] >= 0)
          return Unsafe{build_trace(sys, s, static_cast<std::uint64_t>(first_bad[idx]), parent, parent_input)};
        const PackedState* out = &succ[idx * n_inputs];
        for (std::uint64_t in = 0; in < n_inputs; ++in) {
          const PackedState t = out[in];
          if (seen[t]) continue;
          seen[t] = 1;
          parent[t] = s;
          parent_input[t] = static_cast<std::uint32_t>(in);
          next_frontier.push_back(t);
          ++count;
        }
      }
    }
    frontier.swap(next_frontier);
  }
  return Safe{count};
}

}  // namespace pushd::oracle
