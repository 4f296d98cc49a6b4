#pragma once

// pre* saturation of an M-automaton (rules R1 and R2).

#include <cstdint>
#include <optional>

#include "sdpn/automata.hpp"
#include "sdpn/model.hpp"

namespace sdpn {

struct SaturateOptions {
  /// Processes the worklist in a seeded random order instead of FIFO.
  std::optional<std::uint64_t> shuffle_seed;
};

struct SaturateStats {
  std::size_t added_states = 0;
  std::size_t added_transitions = 0;
};

/// Requires a normalized model.  The result accepts pre*(model, L(a));
/// added stack transitions have original == false.
MAutomaton saturate(const Sdpn& model, const MAutomaton& a,
                    const SaturateOptions& options = {}, SaturateStats* stats = nullptr);

}  // namespace sdpn
