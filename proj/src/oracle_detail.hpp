#pragma once

#include "pushd/oracle.hpp"

namespace pushd::oracle {

bool exceeds(const aiger::TransitionSystem& sys, const Limits& limits);

// Walks parent links from `last` back to the all-zero state.
aiger::Trace build_trace(const aiger::TransitionSystem& sys, PackedState last, std::uint64_t final_input,
                         const std::vector<PackedState>& parent, const std::vector<std::uint32_t>& parent_input);

}  // namespace pushd::oracle
