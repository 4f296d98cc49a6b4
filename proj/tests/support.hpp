#pragma once

// Shared helpers for the test binaries: random models, random
// configurations and patterns, and brute-force path enumeration.

#include <random>
#include <string>
#include <vector>

#include "sdpn/abstraction.hpp"
#include "sdpn/automata.hpp"
#include "sdpn/cegar.hpp"
#include "sdpn/ingest.hpp"
#include "sdpn/model.hpp"

namespace sdpn::test {

using Rng = std::mt19937_64;

inline std::size_t pick(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline bool chance(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

struct ModelShape {
  std::size_t max_rules = 6;
  std::size_t max_channels = 2;
  std::size_t max_symbols = 3;
  std::size_t max_states = 2;
  bool long_words = true;  // occasionally push three symbols
  bool spawns = true;
};

/// Random SDPN with states p,q, symbols g0.., channels x,y.
inline Sdpn random_model(Rng& rng, const ModelShape& shape = {}) {
  Sdpn m;
  const char* channels[] = {"x", "y"};
  const char* states[] = {"p", "q"};
  auto nc = 1 + pick(rng, shape.max_channels);
  auto ns = 1 + pick(rng, shape.max_states);
  auto ng = 1 + pick(rng, shape.max_symbols);
  for (std::size_t i = 0; i < nc; ++i) m.add_channel(channels[i]);
  for (std::size_t i = 0; i < ns; ++i) m.add_state(states[i]);
  for (std::size_t i = 0; i < ng; ++i) m.add_symbol("g" + std::to_string(i));
  auto word = [&](std::size_t len) {
    std::vector<SymbolId> w;
    for (std::size_t i = 0; i < len; ++i) w.push_back(static_cast<SymbolId>(pick(rng, ng)));
    return w;
  };
  auto nr = 1 + pick(rng, shape.max_rules);
  for (std::size_t i = 0; i < nr; ++i) {
    Rule r;
    r.name = "r" + std::to_string(i);
    r.state = static_cast<StateId>(pick(rng, ns));
    r.symbol = static_cast<SymbolId>(pick(rng, ng));
    if (chance(rng, 0.3)) {
      r.action = Action::tau();
    } else {
      r.action = Action::signal(static_cast<ChannelId>(pick(rng, nc)),
                                chance(rng, 0.5) ? Polarity::Send : Polarity::Receive);
    }
    r.target.state = static_cast<StateId>(pick(rng, ns));
    auto shape_kind = pick(rng, 10);
    if (shape.spawns && shape_kind < 2) {
      r.spawned = Thread{static_cast<StateId>(pick(rng, ns)), word(1)};
      r.target.stack = word(1);
    } else if (shape_kind < 4) {
      r.target.stack = {};
    } else if (shape_kind < 7) {
      r.target.stack = word(1);
    } else if (shape_kind < 9 || !shape.long_words) {
      r.target.stack = word(2);
    } else {
      r.target.stack = word(3);
    }
    m.add_rule(std::move(r));
  }
  return m;
}

/// Random configuration over the non-auxiliary symbols of `m`.
inline Configuration random_configuration(Rng& rng, const Sdpn& m, std::size_t max_threads,
                                          std::size_t max_stack, bool allow_empty = false) {
  std::vector<SymbolId> syms;
  for (SymbolId g = 0; g < m.symbols().size(); ++g) {
    if (!m.is_auxiliary(g)) syms.push_back(g);
  }
  Configuration c;
  auto n = allow_empty ? pick(rng, max_threads + 1) : 1 + pick(rng, max_threads);
  for (std::size_t i = 0; i < n; ++i) {
    Thread t;
    t.state = static_cast<StateId>(pick(rng, m.states().size()));
    auto len = pick(rng, max_stack + 1);
    for (std::size_t k = 0; k < len; ++k) t.stack.push_back(syms[pick(rng, syms.size())]);
    c.threads.push_back(std::move(t));
  }
  return c;
}

/// Random target pattern text over the names of `m`.
inline std::string random_pattern(Rng& rng, const Sdpn& m) {
  auto state = [&] { return m.states()[pick(rng, m.states().size())]; };
  auto sym = [&] {
    SymbolId g;
    do {
      g = static_cast<SymbolId>(pick(rng, m.symbols().size()));
    } while (m.is_auxiliary(g));
    return m.symbols()[g];
  };
  switch (pick(rng, 7)) {
    case 0:
      return "ANY* " + state() + " " + sym() + " ANY*";
    case 1:
      return "ANY* " + state() + " ANY*";
    case 2:
      return state() + " " + sym() + " .*";
    case 3:
      return "ANY* " + state() + " " + sym() + " " + sym() + "* ANY*";
    case 4:
      return "ANY* " + state();
    case 5:
      return state() + " .* ANY* " + state() + " " + sym();
    default:
      return "ANY* _ [" + sym() + " " + sym() + "] ANY*";
  }
}

/// Problem over an already normalized model with automata built directly.
inline Problem make_problem_for(const Sdpn& normalized, const Configuration& init,
                                const std::string& target) {
  Problem p;
  p.model = normalized;
  p.init_text = normalized.format(init);
  p.target_text = target;
  p.target = parse_config_pattern(target, normalized);
  p.init_automaton = from_configuration(init);
  p.target_automaton = from_pattern(p.target, normalized);
  return p;
}

/// Action words of relaxed paths of at most `depth` steps from `c` that
/// end in a configuration accepted by `target`.
inline void relaxed_paths(const Sdpn& m, const Configuration& c, const MAutomaton& target,
                          std::size_t depth, std::vector<Action>& prefix,
                          std::vector<std::vector<Action>>& out) {
  if (target.accepts(c)) out.push_back(prefix);
  if (depth == 0) return;
  for (const auto& s : step_relaxed(m, c)) {
    prefix.push_back(s.action);
    relaxed_paths(m, s.result, target, depth - 1, prefix, out);
    prefix.pop_back();
  }
}

/// Whether some relaxed run of at most `depth` steps from `c` reaches
/// `target`.  Breadth-first with a visited set.
inline bool reaches_relaxed(const Sdpn& m, const Configuration& c, const MAutomaton& target,
                            std::size_t depth) {
  std::vector<Configuration> frontier{c};
  std::unordered_map<Configuration, bool, ConfigurationHash> seen{{c, true}};
  for (std::size_t d = 0;; ++d) {
    for (const auto& x : frontier) {
      if (target.accepts(x)) return true;
    }
    if (d == depth) return false;
    std::vector<Configuration> next;
    for (const auto& x : frontier) {
      for (auto& s : step_relaxed(m, x)) {
        if (seen.emplace(s.result, true).second) next.push_back(std::move(s.result));
      }
    }
    frontier = std::move(next);
  }
}

/// Bounded relaxed reachability with a cache shared across start
/// configurations: remembers the largest depth known to fail.
class ReachOracle {
 public:
  ReachOracle(const Sdpn& m, const MAutomaton& target) : m_(m), target_(target) {}

  bool reaches(const Configuration& c, int depth) {
    if (target_.accepts(c)) return true;
    if (depth == 0) return false;
    auto it = failed_.find(c);
    if (it != failed_.end() && it->second >= depth) return false;
    for (const auto& s : step_relaxed(m_, c)) {
      if (reaches(s.result, depth - 1)) return true;
    }
    failed_[c] = depth;
    return false;
  }

 private:
  const Sdpn& m_;
  const MAutomaton& target_;
  std::unordered_map<Configuration, int, ConfigurationHash> failed_;
};

/// Random element of W(order) over `letters` letters.
inline KElement random_element(Rng& rng, std::size_t order, std::size_t letters,
                               std::size_t max_words = 4) {
  std::vector<KWord> ws;
  auto n = pick(rng, max_words + 1);
  for (std::size_t i = 0; i < n; ++i) {
    KWord w;
    auto len = pick(rng, order + 1);
    for (std::size_t k = 0; k < len; ++k) w.push_back(static_cast<char>(pick(rng, letters)));
    ws.push_back(w);
  }
  return KElement::of(std::move(ws));
}

inline KWord random_raw_word(Rng& rng, std::size_t max_len, std::size_t letters) {
  KWord w;
  auto len = pick(rng, max_len + 1);
  for (std::size_t k = 0; k < len; ++k) w.push_back(static_cast<char>(pick(rng, letters)));
  return w;
}

/// Resolves a step of `c` by rule names, in either order for pairs.
inline std::optional<Step> step_by_names(const Sdpn& m, const Configuration& c,
                                         std::vector<std::string> names) {
  std::vector<std::size_t> ids;
  for (const auto& n : names) {
    auto r = m.find_rule(n);
    if (!r) return std::nullopt;
    ids.push_back(*r);
  }
  std::ranges::sort(ids);
  for (const auto& s : step_strict(m, c)) {
    auto rs = s.rules;
    std::ranges::sort(rs);
    if (rs == ids) return s;
  }
  return std::nullopt;
}

inline std::string model_path(const std::string& name) {
  return std::string(SDPN_MODELS_DIR) + "/" + name;
}

}  // namespace sdpn::test
