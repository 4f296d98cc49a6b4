#pragma once

// M-automata over P ∪ Γ: control states (S_C) read a control state symbol,
// stack states (S_S) read stack symbols, epsilon edges close a thread.

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "sdpn/ingest.hpp"
#include "sdpn/model.hpp"

namespace sdpn {

using AutState = std::uint32_t;

struct Transition {
  enum class Kind : std::uint8_t { State, Symbol, Epsilon };
  AutState from = 0;
  Kind kind = Kind::Epsilon;
  std::uint32_t label = 0;  // StateId or SymbolId; 0 for epsilon
  AutState to = 0;
  bool original = true;  // false for transitions added by saturation

  bool same_edge(const Transition& o) const {
    return from == o.from && kind == o.kind && label == o.label && to == o.to;
  }
};

class MAutomaton {
 public:
  AutState add_state(bool control);
  /// Adds a transition unless an identical edge exists.  Returns its index
  /// and whether it is new.
  std::pair<std::size_t, bool> add_transition(AutState from, Transition::Kind kind,
                                              std::uint32_t label, AutState to,
                                              bool original = true);

  void set_initial(AutState s) { initial_ = s; }
  void set_final(AutState s, bool f = true) { final_.at(s) = f; }

  std::size_t state_count() const { return control_.size(); }
  bool is_control(AutState s) const { return control_[s]; }
  bool is_final(AutState s) const { return final_[s]; }
  AutState initial() const { return initial_; }
  const std::vector<Transition>& transitions() const { return transitions_; }
  const std::vector<std::size_t>& out(AutState s) const { return out_[s]; }
  const std::vector<std::size_t>& in(AutState s) const { return in_[s]; }

  /// s_p: the target of the p-edge leaving control state s, if any.
  std::optional<AutState> successor(AutState s, StateId p) const;
  std::optional<std::size_t> find(AutState from, Transition::Kind kind,
                                  std::uint32_t label, AutState to) const;

  std::size_t symbol_transition_count() const;

  /// Checks the structural conditions; returns a description of the first
  /// violated one.
  std::optional<std::string> validate() const;
  bool accepts(const Configuration& c) const;

  /// One line per item: "state N control|stack [initial] [final]" then
  /// "N -LABEL-> M" with labels p:NAME, g:NAME or eps; added edges end in " +".
  std::string dump(const Sdpn& model) const;

 private:
  static std::uint64_t key(AutState from, Transition::Kind kind, std::uint32_t label,
                           AutState to);

  std::vector<bool> control_;
  std::vector<bool> final_;
  AutState initial_ = 0;
  std::vector<Transition> transitions_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

/// Builds an M-automaton accepting exactly the pattern's configurations.
MAutomaton from_pattern(const ConfigPattern& pattern, const Sdpn& model);

/// Automaton accepting one configuration.
MAutomaton from_configuration(const Configuration& c);

/// An automaton whose stack transitions carry the index of a transition of
/// another automaton (the label variable).
struct KAutomaton {
  MAutomaton automaton;
  std::vector<std::optional<std::size_t>> label;  // per transition
};

/// Product of a saturated automaton with a second M-automaton.  Epsilon
/// edges pair with epsilon edges; only reachable pairs are built.
KAutomaton intersect(const MAutomaton& apre, const MAutomaton& other);

/// Enumerates accepted configurations with bounded shape, in
/// breadth-first order of size.
std::vector<Configuration> enumerate(const MAutomaton& a, std::size_t max_threads,
                                     std::size_t max_stack, std::size_t limit);

}  // namespace sdpn
