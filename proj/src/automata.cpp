#include "sdpn/automata.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace sdpn {

using Kind = Transition::Kind;

AutState MAutomaton::add_state(bool control) {
  auto id = static_cast<AutState>(control_.size());
  control_.push_back(control);
  final_.push_back(false);
  out_.emplace_back();
  in_.emplace_back();
  return id;
}

std::uint64_t MAutomaton::key(AutState from, Kind kind, std::uint32_t label, AutState to) {
  if (from >= (1u << 21) || to >= (1u << 21) || label >= (1u << 20)) {
    throw std::length_error("automaton too large for edge index");
  }
  return (static_cast<std::uint64_t>(from) << 43) | (static_cast<std::uint64_t>(to) << 22) |
         (static_cast<std::uint64_t>(label) << 2) | static_cast<std::uint64_t>(kind);
}

std::pair<std::size_t, bool> MAutomaton::add_transition(AutState from, Kind kind,
                                                        std::uint32_t label, AutState to,
                                                        bool original) {
  if (kind == Kind::Epsilon) label = 0;
  auto [it, fresh] = index_.try_emplace(key(from, kind, label, to), transitions_.size());
  if (!fresh) return {it->second, false};
  transitions_.push_back({from, kind, label, to, original});
  out_[from].push_back(it->second);
  in_[to].push_back(it->second);
  return {it->second, true};
}

std::optional<std::size_t> MAutomaton::find(AutState from, Kind kind, std::uint32_t label,
                                            AutState to) const {
  auto it = index_.find(key(from, kind, kind == Kind::Epsilon ? 0 : label, to));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<AutState> MAutomaton::successor(AutState s, StateId p) const {
  for (auto t : out_[s]) {
    const auto& tr = transitions_[t];
    if (tr.kind == Kind::State && tr.label == p) return tr.to;
  }
  return std::nullopt;
}

std::size_t MAutomaton::symbol_transition_count() const {
  return static_cast<std::size_t>(std::ranges::count(transitions_, Kind::Symbol, &Transition::kind));
}

std::optional<std::string> MAutomaton::validate() const {
  if (control_.empty()) return "automaton has no states";
  if (!control_[initial_]) return "initial state " + std::to_string(initial_) + " is not in S_C";
  for (AutState s = 0; s < control_.size(); ++s) {
    if (final_[s] && !control_[s]) return "final state " + std::to_string(s) + " is not in S_C";
  }
  for (const auto& t : transitions_) {
    auto edge = std::to_string(t.from) + " -> " + std::to_string(t.to);
    switch (t.kind) {
      case Kind::State:
        if (!control_[t.from] || control_[t.to]) {
          return "state-symbol edge " + edge + " must go from S_C to S_S";
        }
        break;
      case Kind::Symbol:
        if (control_[t.from]) return "stack-symbol edge " + edge + " leaves S_C";
        if (control_[t.to]) return "stack-symbol edge " + edge + " enters S_C";
        break;
      case Kind::Epsilon:
        if (control_[t.from] || !control_[t.to]) {
          return "epsilon edge " + edge + " must go from S_S to S_C";
        }
        break;
    }
  }
  for (AutState s = 0; s < control_.size(); ++s) {
    if (!control_[s]) continue;
    std::set<std::uint32_t> seen;
    for (auto i : out_[s]) {
      const auto& t = transitions_[i];
      if (!seen.insert(t.label).second) {
        return "state " + std::to_string(s) + " has two successors on state symbol " +
               std::to_string(t.label);
      }
      // Saturation adds stack edges into s_p, so only S_C predecessors count.
      auto from_control = std::ranges::count_if(
          in_[t.to], [&](std::size_t j) { return transitions_[j].kind == Kind::State; });
      if (from_control != 1) {
        return "state " + std::to_string(t.to) + " has a predecessor other than " +
               std::to_string(s);
      }
    }
  }
  return std::nullopt;
}

bool MAutomaton::accepts(const Configuration& c) const {
  std::vector<char> cur(control_.size(), 0);
  cur[initial_] = 1;
  for (const auto& th : c.threads) {
    std::vector<char> stack(control_.size(), 0);
    for (AutState s = 0; s < cur.size(); ++s) {
      if (!cur[s]) continue;
      for (auto i : out_[s]) {
        const auto& t = transitions_[i];
        if (t.kind == Kind::State && t.label == th.state) stack[t.to] = 1;
      }
    }
    for (auto g : th.stack) {
      std::vector<char> next(control_.size(), 0);
      for (AutState s = 0; s < stack.size(); ++s) {
        if (!stack[s]) continue;
        for (auto i : out_[s]) {
          const auto& t = transitions_[i];
          if (t.kind == Kind::Symbol && t.label == g) next[t.to] = 1;
        }
      }
      stack = std::move(next);
    }
    std::vector<char> next(control_.size(), 0);
    bool any = false;
    for (AutState s = 0; s < stack.size(); ++s) {
      if (!stack[s]) continue;
      for (auto i : out_[s]) {
        const auto& t = transitions_[i];
        if (t.kind == Kind::Epsilon) next[t.to] = any = 1;
      }
    }
    if (!any) return false;
    cur = std::move(next);
  }
  for (AutState s = 0; s < cur.size(); ++s) {
    if (cur[s] && final_[s]) return true;
  }
  return false;
}

std::string MAutomaton::dump(const Sdpn& model) const {
  std::ostringstream out;
  for (AutState s = 0; s < control_.size(); ++s) {
    out << "state " << s << (control_[s] ? " control" : " stack");
    if (s == initial_) out << " initial";
    if (final_[s]) out << " final";
    out << "\n";
  }
  for (const auto& t : transitions_) {
    out << t.from << " -";
    switch (t.kind) {
      case Kind::State:
        out << "p:" << model.states().at(t.label);
        break;
      case Kind::Symbol:
        out << "g:" << model.symbols().at(t.label);
        break;
      case Kind::Epsilon:
        out << "eps";
        break;
    }
    out << "-> " << t.to << (t.original ? "" : " +") << "\n";
  }
  return out.str();
}

// --- pattern compilation -------------------------------------------------

namespace {

struct Nfa {
  struct Edge {
    std::size_t from;
    Kind kind;
    std::uint32_t label;
    std::size_t to;
  };
  std::size_t states = 0;
  std::vector<Edge> edges;

  std::size_t fresh() { return states++; }
  void add(std::size_t from, Kind kind, std::uint32_t label, std::size_t to) {
    edges.push_back({from, kind, label, to});
  }
  void eps(std::size_t from, std::size_t to) { add(from, Kind::Epsilon, 0, to); }
};

struct Fragment {
  std::size_t start;
  std::size_t end;
};

class NfaBuilder {
 public:
  explicit NfaBuilder(const Sdpn& model) : model_(model) {}

  Nfa nfa;

  Fragment pattern(const ConfigPattern& p) {
    auto start = nfa.fresh();
    auto cur = start;
    for (const auto& item : p.items) {
      auto f = item.any_threads ? any_threads() : thread(item.thread);
      nfa.eps(cur, f.start);
      cur = f.end;
    }
    return {start, cur};
  }

 private:
  void symbols(std::size_t a, std::size_t b) {
    for (SymbolId g = 0; g < model_.symbols().size(); ++g) {
      if (!model_.is_auxiliary(g)) nfa.add(a, Kind::Symbol, g, b);
    }
  }

  Fragment any_threads() {
    auto x = nfa.fresh();
    auto y = nfa.fresh();
    for (StateId p = 0; p < model_.states().size(); ++p) nfa.add(x, Kind::State, p, y);
    symbols(y, y);
    nfa.eps(y, x);
    return {x, x};
  }

  Fragment thread(const ThreadPattern& t) {
    auto a = nfa.fresh();
    auto b = nfa.fresh();
    if (t.states.empty()) {
      for (StateId p = 0; p < model_.states().size(); ++p) nfa.add(a, Kind::State, p, b);
    } else {
      for (auto p : t.states) nfa.add(a, Kind::State, p, b);
    }
    auto r = regex(t.stack);
    nfa.eps(b, r.start);
    return {a, r.end};
  }

  Fragment regex(const StackRegex& r) {
    using RK = StackRegex::Kind;
    auto s = nfa.fresh();
    auto e = nfa.fresh();
    switch (r.kind) {
      case RK::Empty:
        nfa.eps(s, e);
        break;
      case RK::Symbol:
      case RK::Class:
        for (auto g : r.symbols) nfa.add(s, Kind::Symbol, g, e);
        break;
      case RK::AnySymbol:
        symbols(s, e);
        break;
      case RK::Concat: {
        auto cur = s;
        for (const auto& c : r.children) {
          auto f = regex(c);
          nfa.eps(cur, f.start);
          cur = f.end;
        }
        nfa.eps(cur, e);
        break;
      }
      case RK::Alt:
        for (const auto& c : r.children) {
          auto f = regex(c);
          nfa.eps(s, f.start);
          nfa.eps(f.end, e);
        }
        break;
      case RK::Star:
      case RK::Plus:
      case RK::Optional: {
        auto f = regex(r.children[0]);
        nfa.eps(s, f.start);
        nfa.eps(f.end, e);
        if (r.kind != RK::Plus) nfa.eps(s, e);
        if (r.kind != RK::Optional) nfa.eps(f.end, f.start);
        break;
      }
    }
    return {s, e};
  }

  const Sdpn& model_;
};

// Keeps states reachable from the initial state and co-reachable to a
// final state.
MAutomaton trim(const MAutomaton& a) {
  auto n = a.state_count();
  std::vector<char> fwd(n, 0), bwd(n, 0);
  std::vector<AutState> work{a.initial()};
  fwd[a.initial()] = 1;
  while (!work.empty()) {
    auto s = work.back();
    work.pop_back();
    for (auto i : a.out(s)) {
      auto t = a.transitions()[i].to;
      if (!fwd[t]) {
        fwd[t] = 1;
        work.push_back(t);
      }
    }
  }
  for (AutState s = 0; s < n; ++s) {
    if (a.is_final(s) && fwd[s]) {
      bwd[s] = 1;
      work.push_back(s);
    }
  }
  while (!work.empty()) {
    auto s = work.back();
    work.pop_back();
    for (auto i : a.in(s)) {
      auto f = a.transitions()[i].from;
      if (fwd[f] && !bwd[f]) {
        bwd[f] = 1;
        work.push_back(f);
      }
    }
  }
  MAutomaton out;
  std::vector<AutState> map(n, 0);
  map[a.initial()] = out.add_state(true);
  for (AutState s = 0; s < n; ++s) {
    if (s != a.initial() && fwd[s] && bwd[s]) map[s] = out.add_state(a.is_control(s));
  }
  out.set_initial(map[a.initial()]);
  for (AutState s = 0; s < n; ++s) {
    if (fwd[s] && bwd[s] && a.is_final(s)) out.set_final(map[s]);
  }
  for (const auto& t : a.transitions()) {
    if (fwd[t.from] && bwd[t.from] && bwd[t.to]) {
      out.add_transition(map[t.from], t.kind, t.label, map[t.to], t.original);
    }
  }
  return out;
}

}  // namespace

MAutomaton from_pattern(const ConfigPattern& pattern, const Sdpn& model) {
  NfaBuilder b(model);
  auto top = b.pattern(pattern);
  const auto& nfa = b.nfa;

  // Epsilon closures.
  std::vector<std::vector<std::size_t>> eps_out(nfa.states);
  std::vector<std::vector<std::size_t>> sym_out(nfa.states);
  for (std::size_t i = 0; i < nfa.edges.size(); ++i) {
    const auto& e = nfa.edges[i];
    (e.kind == Kind::Epsilon ? eps_out : sym_out)[e.from].push_back(i);
  }
  std::vector<std::vector<std::size_t>> closure(nfa.states);
  for (std::size_t x = 0; x < nfa.states; ++x) {
    std::vector<char> seen(nfa.states, 0);
    std::vector<std::size_t> work{x};
    seen[x] = 1;
    while (!work.empty()) {
      auto y = work.back();
      work.pop_back();
      closure[x].push_back(y);
      for (auto i : eps_out[y]) {
        auto z = nfa.edges[i].to;
        if (!seen[z]) {
          seen[z] = 1;
          work.push_back(z);
        }
      }
    }
  }
  // Epsilon-free edges x -l-> y.
  struct Edge {
    Kind kind;
    std::uint32_t label;
    std::size_t to;
    auto operator<=>(const Edge&) const = default;
  };
  std::vector<std::set<Edge>> edges(nfa.states);
  std::vector<char> accepting(nfa.states, 0);
  for (std::size_t x = 0; x < nfa.states; ++x) {
    for (auto y : closure[x]) {
      if (y == top.end) accepting[x] = 1;
      for (auto i : sym_out[y]) {
        const auto& e = nfa.edges[i];
        edges[x].insert({e.kind, e.label, e.to});
      }
    }
  }

  MAutomaton a;
  std::vector<AutState> c(nfa.states), s(nfa.states);
  for (std::size_t x = 0; x < nfa.states; ++x) {
    c[x] = a.add_state(true);
    s[x] = a.add_state(false);
    if (accepting[x]) a.set_final(c[x]);
  }
  a.set_initial(c[top.start]);
  for (std::size_t x = 0; x < nfa.states; ++x) {
    a.add_transition(s[x], Kind::Epsilon, 0, c[x]);
    std::map<StateId, std::vector<std::size_t>> by_state;
    for (const auto& e : edges[x]) {
      if (e.kind == Kind::Symbol) {
        a.add_transition(s[x], Kind::Symbol, e.label, s[e.to]);
      } else {
        by_state[e.label].push_back(e.to);
      }
    }
    for (const auto& [p, targets] : by_state) {
      auto sp = a.add_state(false);
      a.add_transition(c[x], Kind::State, p, sp);
      for (auto y : targets) {
        a.add_transition(sp, Kind::Epsilon, 0, c[y]);
        for (const auto& e : edges[y]) {
          if (e.kind == Kind::Symbol) a.add_transition(sp, Kind::Symbol, e.label, s[e.to]);
        }
      }
    }
  }
  return trim(a);
}

MAutomaton from_configuration(const Configuration& c) {
  MAutomaton a;
  auto cur = a.add_state(true);
  a.set_initial(cur);
  for (const auto& t : c.threads) {
    auto x = a.add_state(false);
    a.add_transition(cur, Kind::State, t.state, x);
    for (auto g : t.stack) {
      auto y = a.add_state(false);
      a.add_transition(x, Kind::Symbol, g, y);
      x = y;
    }
    cur = a.add_state(true);
    a.add_transition(x, Kind::Epsilon, 0, cur);
  }
  a.set_final(cur);
  return a;
}

KAutomaton intersect(const MAutomaton& apre, const MAutomaton& other) {
  KAutomaton k;
  auto& out = k.automaton;
  std::map<std::pair<AutState, AutState>, AutState> ids;
  std::deque<std::pair<AutState, AutState>> work;
  auto get = [&](AutState x, AutState y) {
    auto [it, fresh] = ids.try_emplace({x, y}, 0);
    if (fresh) {
      it->second = out.add_state(apre.is_control(x));
      if (apre.is_final(x) && other.is_final(y)) out.set_final(it->second);
      work.push_back({x, y});
    }
    return it->second;
  };
  out.set_initial(get(apre.initial(), other.initial()));
  while (!work.empty()) {
    auto [x, y] = work.front();
    work.pop_front();
    auto from = ids.at({x, y});
    for (auto i : apre.out(x)) {
      const auto& t = apre.transitions()[i];
      for (auto j : other.out(y)) {
        const auto& u = other.transitions()[j];
        if (t.kind != u.kind || t.label != u.label) continue;
        auto to = get(t.to, u.to);
        auto [idx, fresh] = out.add_transition(from, t.kind, t.label, to, t.original);
        if (fresh) k.label.push_back(t.kind == Kind::Symbol ? std::optional<std::size_t>(i) : std::nullopt);
        (void)idx;
      }
    }
  }
  return k;
}

std::vector<Configuration> enumerate(const MAutomaton& a, std::size_t max_threads,
                                     std::size_t max_stack, std::size_t limit) {
  std::set<Configuration> found;
  std::vector<Configuration> order;
  // Frontier of (control state, configuration prefix), grown one thread at a time.
  std::set<std::pair<AutState, Configuration>> frontier{{a.initial(), {}}};
  for (std::size_t k = 0; k <= max_threads && !frontier.empty(); ++k) {
    for (const auto& [s, c] : frontier) {
      if (a.is_final(s) && found.insert(c).second) {
        order.push_back(c);
        if (order.size() >= limit) return order;
      }
    }
    if (k == max_threads) break;
    std::set<std::pair<AutState, Configuration>> next;
    for (const auto& [s, c] : frontier) {
      for (auto i : a.out(s)) {
        const auto& pe = a.transitions()[i];
        if (pe.kind != Kind::State) continue;
        // Depth-first over stack words from s_p.
        std::vector<std::pair<AutState, std::vector<SymbolId>>> work{{pe.to, {}}};
        while (!work.empty()) {
          auto [x, w] = std::move(work.back());
          work.pop_back();
          for (auto j : a.out(x)) {
            const auto& t = a.transitions()[j];
            if (t.kind == Kind::Epsilon) {
              auto grown = c;
              grown.threads.push_back({pe.label, w});
              next.insert({t.to, std::move(grown)});
            } else if (t.kind == Kind::Symbol && w.size() < max_stack) {
              auto w2 = w;
              w2.push_back(t.label);
              work.push_back({t.to, std::move(w2)});
            }
          }
        }
        if (next.size() > limit * 16) break;
      }
    }
    frontier = std::move(next);
  }
  return order;
}

}  // namespace sdpn
