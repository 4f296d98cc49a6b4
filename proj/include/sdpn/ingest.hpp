#pragma once

// Text front ends: the .sdpn model format, configuration patterns, and the
// .cfgp control-flow-graph language with its translation to SDPN rules.

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sdpn/model.hpp"

namespace sdpn {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

Sdpn parse_sdpn(std::string_view text);
/// Canonical text form; parse_sdpn(print_sdpn(m)) == m for parsed models.
std::string print_sdpn(const Sdpn& model);

// --- configuration patterns ------------------------------------------------

/// Regular expression over stack symbols.
struct StackRegex {
  enum class Kind { Empty, Symbol, AnySymbol, Class, Concat, Alt, Star, Plus, Optional };
  Kind kind = Kind::Empty;
  std::vector<SymbolId> symbols;  // Symbol (one entry) or Class
  std::vector<StackRegex> children;
};

struct ThreadPattern {
  std::vector<StateId> states;  // empty means any state
  StackRegex stack;
};

struct PatternItem {
  bool any_threads = false;  // ANY*: an arbitrary sequence of threads
  ThreadPattern thread;
};

/// A sequence of items; no items denotes the empty configuration.
struct ConfigPattern {
  std::vector<PatternItem> items;
};

ConfigPattern parse_config_pattern(std::string_view text, const Sdpn& model);

/// Direct backtracking matcher, independent of the automaton construction.
/// Wildcards range over non-auxiliary symbols.
bool pattern_matches(const ConfigPattern& pattern, const Sdpn& model,
                     const Configuration& c);

/// Parses a fully concrete configuration "p a b | q c" or "p a b q c".
Configuration parse_configuration(std::string_view text, const Sdpn& model);

// --- control-flow-graph programs ------------------------------------------

struct Expr {
  enum class Kind { Const, Var, Any };
  Kind kind = Kind::Const;
  std::string text;  // constant value or variable name
};

struct Statement {
  enum class Kind { Assign, Assume, Skip, Call, Return, Spawn, Send, Recv };
  Kind kind = Kind::Skip;
  std::string target;    // assigned variable, callee, spawned thread, channel
  std::string variable;  // Recv: receiving variable (may be empty)
  Expr lhs;              // Assume left operand
  Expr value;            // Assign/Return/Send value, Assume right operand
  bool negated = false;  // Assume with !=
  bool has_value = false;
};

struct VarDecl {
  std::string name;
  std::vector<std::string> domain;
  std::string initial;
};

struct Edge {
  std::string from;
  std::string to;
  Statement statement;
  std::size_t line = 0;
};

struct Graph {
  std::string name;
  bool is_thread = false;
  std::vector<VarDecl> locals;
  std::string entry;
  std::vector<Edge> edges;
  std::vector<std::string> returns;  // procedure result domain
};

struct ProgramAst {
  std::vector<std::pair<std::string, std::vector<std::string>>> channels;
  std::vector<VarDecl> thread_locals;
  std::vector<Graph> graphs;
  std::string main;
};

ProgramAst parse_cfgp(std::string_view text);

struct TranslateOptions {
  std::size_t state_cap = 100'000;
};

struct Translation {
  Sdpn model;
  Configuration init;
};

/// Builds the SDPN of a program: states are thread-local valuations, stack
/// symbols pair a node with a procedure-local valuation.
Translation cfg_to_sdpn(const ProgramAst& program, const TranslateOptions& options = {});

/// Reads a model file, dispatching on the extension (.sdpn or .cfgp).
/// For .cfgp the initial configuration is returned as well.
Translation load_model_file(const std::string& path);

}  // namespace sdpn
