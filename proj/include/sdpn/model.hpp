#pragma once

// Synchronized dynamic pushdown networks: actions, rules, configurations,
// strict/relaxed step relations and a bounded strict-semantics explorer.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace sdpn {

using StateId = std::uint32_t;
using SymbolId = std::uint32_t;
using ChannelId = std::uint32_t;

enum class Polarity : std::uint8_t { Send, Receive };

/// An action label.  `Tau` is the internal/synchronized action, `Silent` an
/// unobservable step that contributes nothing to the path word, and
/// `Signal` a send or receive on a channel.
class Action {
 public:
  enum class Kind : std::uint8_t { Tau, Silent, Signal };

  constexpr Action() = default;

  static constexpr Action tau() { return Action(Kind::Tau, 0, Polarity::Send); }
  static constexpr Action silent() {
    return Action(Kind::Silent, 0, Polarity::Send);
  }
  static constexpr Action signal(ChannelId channel, Polarity polarity) {
    return Action(Kind::Signal, channel, polarity);
  }

  constexpr Kind kind() const { return kind_; }
  constexpr bool is_tau() const { return kind_ == Kind::Tau; }
  constexpr bool is_silent() const { return kind_ == Kind::Silent; }
  constexpr bool is_signal() const { return kind_ == Kind::Signal; }
  constexpr ChannelId channel() const { return channel_; }
  constexpr Polarity polarity() const { return polarity_; }

  constexpr auto operator<=>(const Action&) const = default;

 private:
  constexpr Action(Kind kind, ChannelId channel, Polarity polarity)
      : kind_(kind), polarity_(polarity), channel_(channel) {}

  Kind kind_ = Kind::Tau;
  Polarity polarity_ = Polarity::Send;
  ChannelId channel_ = 0;
};

/// The co-action of a signal: same channel, opposite polarity.
/// Throws std::invalid_argument for tau and silent actions.
Action co_action(const Action& a);

/// One pushdown process: control state plus stack word, top first.
struct Thread {
  StateId state = 0;
  std::vector<SymbolId> stack;

  auto operator<=>(const Thread&) const = default;
};

struct Configuration {
  std::vector<Thread> threads;

  auto operator<=>(const Configuration&) const = default;
};

struct ConfigurationHash {
  std::size_t operator()(const Configuration& c) const noexcept;
};

/// p γ -a-> target, or p γ -a-> spawned · target for spawn rules.  The
/// spawned thread is placed immediately to the left of the continuing one.
struct Rule {
  std::string name;
  StateId state = 0;
  SymbolId symbol = 0;
  Action action;
  Thread target;
  std::optional<Thread> spawned;

  bool is_spawn() const { return spawned.has_value(); }
  bool operator==(const Rule&) const = default;
};

struct Channel {
  std::string name;
  std::string value;  // empty for value-less channels

  bool operator==(const Channel&) const = default;
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Sdpn {
 public:
  ChannelId add_channel(std::string name, std::string value = {});
  StateId add_state(std::string name);
  SymbolId add_symbol(std::string name, bool auxiliary = false);
  /// Appends a rule; ids must already be declared.
  std::size_t add_rule(Rule rule);

  std::optional<ChannelId> find_channel(std::string_view name,
                                        std::string_view value = {}) const;
  std::optional<StateId> find_state(std::string_view name) const;
  std::optional<SymbolId> find_symbol(std::string_view name) const;

  const std::vector<Channel>& channels() const { return channels_; }
  const std::vector<std::string>& states() const { return states_; }
  const std::vector<std::string>& symbols() const { return symbols_; }
  const std::vector<Rule>& rules() const { return rules_; }
  bool is_auxiliary(SymbolId s) const { return auxiliary_[s]; }

  /// Indices of rules whose left-hand side is (state, symbol), in rule order.
  const std::vector<std::size_t>& rules_for(StateId state, SymbolId symbol) const;
  std::optional<std::size_t> find_rule(std::string_view name) const;

  /// All signal actions over the declared channels, both polarities.
  std::vector<Action> signal_actions() const;

  std::string format(const Action& a) const;
  std::string format(const Thread& t) const;
  std::string format(const Configuration& c) const;
  std::string format(const Rule& r) const;

  bool operator==(const Sdpn& other) const;

 private:
  static std::uint64_t head_key(StateId p, SymbolId g) {
    return (static_cast<std::uint64_t>(p) << 32) | g;
  }

  std::vector<Channel> channels_;
  std::vector<std::string> states_;
  std::vector<std::string> symbols_;
  std::vector<bool> auxiliary_;
  std::vector<Rule> rules_;
  std::unordered_map<std::string, ChannelId> channel_index_;
  std::unordered_map<std::string, StateId> state_index_;
  std::unordered_map<std::string, SymbolId> symbol_index_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> by_head_;
};

/// Rewrites rules so that every simple right-hand side pushes at most two
/// symbols and every spawn pushes exactly one symbol per thread.  Helper
/// rules are silent and use fresh auxiliary stack symbols, so observable
/// action words are unchanged.
Sdpn normalize(const Sdpn& model);

bool is_normalized(const Sdpn& model);

/// One transition of the network.  `rules` holds one rule index, or two
/// for a synchronized pair (then `action` is tau).
struct Step {
  Action action;
  std::vector<std::size_t> rules;
  Configuration result;

  bool operator==(const Step&) const = default;
};

struct Trace {
  Configuration start;
  std::vector<Step> steps;

  const Configuration& end() const {
    return steps.empty() ? start : steps.back().result;
  }
};

/// Applies a single rule at thread `index`; the caller guarantees the rule
/// head matches.
Configuration apply_rule(const Configuration& c, std::size_t index,
                         const Rule& rule);

/// Successors under the relaxed semantics: synchronized pairs (tau),
/// internal and silent steps, and unsynchronized signal steps.
std::vector<Step> step_relaxed(const Sdpn& model, const Configuration& c);

/// Successors under the strict semantics: only tau/silent rules and
/// synchronized pairs between two distinct threads.
std::vector<Step> step_strict(const Sdpn& model, const Configuration& c);

/// Successors under the plain DPN semantics: every rule fires alone.
std::vector<Step> step_dpn(const Sdpn& model, const Configuration& c);

/// Checks that `trace` is a valid strict-semantics run of `model`.
bool replays_strict(const Sdpn& model, const Trace& trace);

struct SearchOptions {
  std::size_t depth = 0;
  std::size_t node_cap = 2'000'000;
};

struct SearchResult {
  enum class Status { Found, NotFound, BudgetExceeded };
  Status status = Status::NotFound;
  std::optional<Trace> trace;
  std::size_t explored = 0;
};

using ConfigPredicate = std::function<bool(const Configuration&)>;

/// Breadth-first strict-semantics search.  The returned trace is the
/// shortest one, and among those the least by rule indices.
SearchResult bounded_search_strict(const Sdpn& model,
                                   const std::vector<Configuration>& init,
                                   const ConfigPredicate& target,
                                   const SearchOptions& options);

}  // namespace sdpn
