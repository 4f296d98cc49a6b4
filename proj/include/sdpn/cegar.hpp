#pragma once

// Abstraction refinement: per-order abstract checks, bounded concrete
// validation of abstract counterexamples, and the refinement loop.

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdpn/abstraction.hpp"
#include "sdpn/automata.hpp"
#include "sdpn/ingest.hpp"
#include "sdpn/labelling.hpp"
#include "sdpn/model.hpp"

namespace sdpn {

/// A reachability question: from the configurations of `init` to those of
/// `target`, over the normalized model.
struct Problem {
  Sdpn model;  // normalized
  std::string init_text;
  std::string target_text;
  ConfigPattern init;
  ConfigPattern target;
  MAutomaton init_automaton;
  MAutomaton target_automaton;
};

Problem make_problem(const Sdpn& model, const std::string& init, const std::string& target);

struct CheckOptions {
  std::size_t variable_cap = 2'000'000;
};

struct CheckResult {
  AbstractionKind kind = AbstractionKind::Prefix;
  std::size_t order = 0;
  bool proven = false;
  std::optional<std::size_t> j;  // least j with tau^j in the meet
  KElement paths;                // abstract path language
  KElement meet;                 // paths meet tau*
  std::size_t apre_transitions = 0;
  std::size_t constraints = 0;
  SolverStats solver;
  double seconds = 0;
};

CheckResult check_order(const Problem& problem, const KDomain& domain,
                        const CheckOptions& options = {});

struct ValidateOptions {
  std::size_t node_cap = 2'000'000;
  std::size_t max_threads = 8;
  std::size_t max_stack = 4;
  std::size_t max_configs = 10'000;
};

struct Validation {
  bool real = false;
  std::optional<Trace> trace;
  std::size_t budget = 0;
  std::size_t explored = 0;
  bool exhausted = false;  // node cap hit: reported as spurious with a warning
  std::size_t initial_configs = 0;
};

Validation validate(const Problem& problem, std::size_t j, std::size_t budget,
                    const ValidateOptions& options = {});

struct CegarOptions {
  std::size_t max_order = 4;
  std::optional<std::size_t> budget;  // default: the current order
  bool use_prefix = true;
  bool use_suffix = true;
  CheckOptions check;
  ValidateOptions validation;
};

struct OrderRecord {
  std::size_t order = 0;
  std::vector<CheckResult> checks;
  std::optional<Validation> validation;
  std::optional<std::string> error;
};

struct Verdict {
  enum class Outcome { Unreachable, Reachable, Unknown };
  Outcome outcome = Outcome::Unknown;
  std::size_t order = 0;
  AbstractionKind kind = AbstractionKind::Prefix;
  std::optional<Trace> trace;
  std::vector<OrderRecord> history;
  double seconds = 0;
};

std::string to_string(Verdict::Outcome o);

Verdict run_cegar(const Problem& problem, const CegarOptions& options);

nlohmann::json trace_to_json(const Sdpn& model, const Trace& trace);
nlohmann::json check_to_json(const Sdpn& model, const CheckResult& r);
/// Report with a separate "timing" member; everything else is deterministic.
nlohmann::json verdict_to_json(const Problem& problem, const CegarOptions& options,
                               const Verdict& v);

}  // namespace sdpn
