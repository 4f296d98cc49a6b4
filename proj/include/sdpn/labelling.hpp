#pragma once

// Abstract labelling of a saturated automaton: constraints Y1-Y5 over label
// functions, a demand-driven least-fixpoint solver, and evaluation of the
// abstract path language of a product automaton.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "sdpn/abstraction.hpp"
#include "sdpn/automata.hpp"
#include "sdpn/model.hpp"

namespace sdpn {

/// One inequality "rhs <= lambda(target)".  Transition fields index the
/// saturated automaton.  `action` is the rule action; a silent action
/// contributes 1.
struct Constraint {
  enum class Kind : std::uint8_t { Y1, Y2, Y3, Y4, Y5 };
  Kind kind = Kind::Y1;
  std::size_t target = 0;
  Action action;
  std::size_t rule = 0;
  std::size_t first = 0;   // Y2: t'; Y4: outer (s_p', g1, q'); Y5: spawned (s_p2, g2, s'')
  std::size_t second = 0;  // Y4: inner (q', g2, q); Y5: continuing (s'_p1, g1, q)
  /// Y5 only: all epsilon bridges (spawned edge, continuing edge) summed.
  std::vector<std::pair<std::size_t, std::size_t>> bridges;

  bool operator==(const Constraint&) const = default;
};

std::string to_string(Constraint::Kind k);

class ConstraintError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Constraints grouped by target transition.
struct ConstraintSystem {
  std::vector<std::vector<Constraint>> by_target;

  std::size_t size() const;
};

ConstraintSystem generate_constraints(const Sdpn& model, const MAutomaton& apre);

class ResourceLimit : public std::runtime_error {
 public:
  ResourceLimit(const std::string& what, std::size_t variables, std::size_t updates)
      : std::runtime_error(what), variables(variables), updates(updates) {}
  std::size_t variables;
  std::size_t updates;
};

struct SolverOptions {
  std::size_t variable_cap = 2'000'000;
  std::optional<std::uint64_t> schedule_seed;
  std::ostream* trace = nullptr;
};

struct SolverStats {
  std::size_t variables = 0;
  std::size_t updates = 0;
  std::size_t evaluations = 0;
  std::size_t table_words = 0;
};

/// Right-hand side evaluation for one (transition, word) variable, given a
/// lookup for other variables.  Shared by the solver and test oracles.
using LabelLookup = std::function<KElement(std::size_t transition, const KWord& w)>;
KElement evaluate_rhs(const ConstraintSystem& system, const KDomain& domain,
                      ShuffleMemo& memo, std::size_t transition, const KWord& w,
                      const LabelLookup& lookup);

/// Demand-driven solver.  Label functions are join-preserving, so a table
/// entry is kept per (transition, single word) and applications to sets
/// join the entries of their words.
class Solver {
 public:
  Solver(const ConstraintSystem& system, const KDomain& domain, SolverOptions options = {});

  /// lambda(t)(k), solving every variable this demands.
  KElement apply(std::size_t transition, const KElement& k);
  KElement apply(std::size_t transition, const KWord& w);

  /// Solved table: (transition, word) -> value.
  std::map<std::pair<std::size_t, KWord>, KElement> table() const;
  const SolverStats& stats() const { return stats_; }
  const KDomain& domain() const { return domain_; }
  ShuffleMemo& memo() { return memo_; }

 private:
  struct Var {
    std::size_t transition;
    KWord word;
    KElement value;
    std::vector<std::size_t> dependents;
    bool queued = false;
  };

  std::size_t demand(std::size_t transition, const KWord& w);
  void solve();
  void recompute(std::size_t v);

  const ConstraintSystem& system_;
  KDomain domain_;
  SolverOptions options_;
  ShuffleMemo memo_;
  std::vector<Var> vars_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::size_t> work_;
  SolverStats stats_;
  std::uint64_t rng_state_ = 0;
};

/// Abstract path language of a product automaton whose stack transitions
/// carry labels of the saturated automaton.
KElement evaluate(const KAutomaton& product, Solver& solver);

}  // namespace sdpn
