#include "sdpn/labelling.hpp"

#include <algorithm>
#include <deque>
#include <ostream>
#include <unordered_set>

namespace sdpn {

using TKind = Transition::Kind;

std::string to_string(Constraint::Kind k) {
  static const char* names[] = {"Y1", "Y2", "Y3", "Y4", "Y5"};
  return names[static_cast<int>(k)];
}

std::size_t ConstraintSystem::size() const {
  std::size_t n = 0;
  for (const auto& v : by_target) n += v.size();
  return n;
}

ConstraintSystem generate_constraints(const Sdpn& model, const MAutomaton& apre) {
  ConstraintSystem sys;
  sys.by_target.resize(apre.transitions().size());
  const auto& ts = apre.transitions();

  auto edges = [&](AutState x, std::optional<SymbolId> g) {
    std::vector<std::size_t> out;
    for (auto i : apre.out(x)) {
      if (ts[i].kind == TKind::Symbol && (!g || ts[i].label == *g)) out.push_back(i);
    }
    return out;
  };
  auto target = [&](AutState from, SymbolId g, AutState to, std::size_t rule) {
    auto t = apre.find(from, TKind::Symbol, g, to);
    if (!t) {
      throw ConstraintError("saturated automaton lacks transition required by rule " +
                            std::to_string(rule) + " (" + model.format(model.rules()[rule]) + ")");
    }
    return *t;
  };

  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i].kind == TKind::Symbol && ts[i].original) {
      sys.by_target[i].push_back({Constraint::Kind::Y1, i, Action::silent(), 0, 0, 0, {}});
    }
  }

  for (AutState s = 0; s < apre.state_count(); ++s) {
    if (!apre.is_control(s)) continue;
    for (std::size_t ri = 0; ri < model.rules().size(); ++ri) {
      const auto& r = model.rules()[ri];
      auto sp = apre.successor(s, r.state);
      if (!sp) {
        throw ConstraintError("missing s_p state for control state " +
                              model.states()[r.state] + " at automaton state " +
                              std::to_string(s));
      }
      Constraint c;
      c.action = r.action;
      c.rule = ri;
      if (r.spawned) {
        auto s2 = apre.successor(s, r.spawned->state);
        if (!s2) continue;
        std::map<AutState, std::vector<std::pair<std::size_t, std::size_t>>> by_q;
        for (auto t2 : edges(*s2, r.spawned->stack[0])) {
          for (auto e : apre.out(ts[t2].to)) {
            if (ts[e].kind != TKind::Epsilon) continue;
            auto s1 = apre.successor(ts[e].to, r.target.state);
            if (!s1) continue;
            for (auto t1 : edges(*s1, r.target.stack[0])) by_q[ts[t1].to].push_back({t2, t1});
          }
        }
        for (auto& [q, bridges] : by_q) {
          c.kind = Constraint::Kind::Y5;
          c.target = target(*sp, r.symbol, q, ri);
          std::ranges::sort(bridges);
          bridges.erase(std::unique(bridges.begin(), bridges.end()), bridges.end());
          c.first = bridges.front().first;
          c.second = bridges.front().second;
          c.bridges = std::move(bridges);
          sys.by_target[c.target].push_back(c);
        }
        continue;
      }
      auto x = apre.successor(s, r.target.state);
      if (!x) continue;
      const auto& w = r.target.stack;
      if (w.empty()) {
        c.kind = Constraint::Kind::Y3;
        c.target = target(*sp, r.symbol, *x, ri);
        sys.by_target[c.target].push_back(c);
      } else if (w.size() == 1) {
        for (auto t1 : edges(*x, w[0])) {
          c.kind = Constraint::Kind::Y2;
          c.first = t1;
          c.target = target(*sp, r.symbol, ts[t1].to, ri);
          sys.by_target[c.target].push_back(c);
        }
      } else {
        for (auto t1 : edges(*x, w[0])) {
          for (auto t2 : edges(ts[t1].to, w[1])) {
            c.kind = Constraint::Kind::Y4;
            c.first = t1;
            c.second = t2;
            c.target = target(*sp, r.symbol, ts[t2].to, ri);
            sys.by_target[c.target].push_back(c);
          }
        }
      }
    }
  }
  return sys;
}

KElement evaluate_rhs(const ConstraintSystem& system, const KDomain& domain, ShuffleMemo& memo,
                      std::size_t transition, const KWord& w, const LabelLookup& lookup) {
  KElement out;
  KElement body;
  for (const auto& c : system.by_target[transition]) {
    body = {};
    switch (c.kind) {
      case Constraint::Kind::Y1:
      case Constraint::Kind::Y3:
        body.words.push_back(w);
        break;
      case Constraint::Kind::Y2:
        body = lookup(c.first, w);
        break;
      case Constraint::Kind::Y4:
        for (const auto& u : lookup(c.second, w).words) join_into(body, lookup(c.first, u));
        break;
      case Constraint::Kind::Y5:
        for (const auto& [spawned, cont] : c.bridges) {
          join_into(body, memo.sets(lookup(spawned, KWord{}), lookup(cont, w)));
        }
        break;
    }
    if (c.kind != Constraint::Kind::Y1) body = domain.concat(domain.generator(c.action), body);
    join_into(out, body);
  }
  return out;
}

Solver::Solver(const ConstraintSystem& system, const KDomain& domain, SolverOptions options)
    : system_(system), domain_(domain), options_(options), memo_(domain_) {
  if (options_.schedule_seed) rng_state_ = *options_.schedule_seed * 2 + 1;
}

namespace {

std::string var_key(std::size_t t, const KWord& w) {
  std::string k(reinterpret_cast<const char*>(&t), sizeof t);
  return k + w;
}

void write_word(std::ostream& os, const KWord& w) {
  os << '"';
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) os << '.';
    os << static_cast<int>(static_cast<Letter>(w[i]));
  }
  os << '"';
}

void write_element(std::ostream& os, const KElement& k) {
  os << '{';
  for (std::size_t i = 0; i < k.words.size(); ++i) {
    if (i) os << ',';
    write_word(os, k.words[i]);
  }
  os << '}';
}

}  // namespace

std::size_t Solver::demand(std::size_t transition, const KWord& w) {
  auto [it, fresh] = index_.try_emplace(var_key(transition, w), vars_.size());
  if (!fresh) return it->second;
  if (vars_.size() >= options_.variable_cap) {
    index_.erase(it);
    throw ResourceLimit("label variable cap exceeded (" + std::to_string(options_.variable_cap) +
                            " variables, " + std::to_string(stats_.updates) + " updates)",
                        vars_.size(), stats_.updates);
  }
  vars_.push_back({transition, w, {}, {}, true});
  work_.push_back(vars_.size() - 1);
  stats_.variables = vars_.size();
  return vars_.size() - 1;
}

void Solver::recompute(std::size_t v) {
  ++stats_.evaluations;
  std::unordered_set<std::size_t> deps;
  auto lookup = [&](std::size_t t, const KWord& w) {
    auto d = demand(t, w);
    if (deps.insert(d).second) {
      auto& list = vars_[d].dependents;
      if (std::ranges::find(list, v) == list.end()) list.push_back(v);
    }
    return vars_[d].value;
  };
  auto t = vars_[v].transition;
  auto w = vars_[v].word;
  auto next = evaluate_rhs(system_, domain_, memo_, t, w, lookup);
  if (leq(next, vars_[v].value)) return;
  auto old = vars_[v].value;
  vars_[v].value = join(old, next);
  ++stats_.updates;
  stats_.table_words += vars_[v].value.size() - old.size();
  if (options_.trace) {
    auto& os = *options_.trace;
    os << "t" << t << " ";
    write_word(os, w);
    os << " ";
    write_element(os, old);
    os << " -> ";
    write_element(os, vars_[v].value);
    os << "\n";
  }
  for (auto d : vars_[v].dependents) {
    if (!vars_[d].queued) {
      vars_[d].queued = true;
      work_.push_back(d);
    }
  }
}

void Solver::solve() {
  while (!work_.empty()) {
    std::size_t v;
    if (options_.schedule_seed) {
      rng_state_ ^= rng_state_ << 13;
      rng_state_ ^= rng_state_ >> 7;
      rng_state_ ^= rng_state_ << 17;
      auto i = rng_state_ % work_.size();
      v = work_[i];
      work_[i] = work_.back();
    } else {
      v = work_.back();
    }
    work_.pop_back();
    vars_[v].queued = false;
    recompute(v);
  }
}

KElement Solver::apply(std::size_t transition, const KWord& w) {
  auto v = demand(transition, w);
  solve();
  return vars_[v].value;
}

KElement Solver::apply(std::size_t transition, const KElement& k) {
  std::vector<std::size_t> ids;
  for (const auto& w : k.words) ids.push_back(demand(transition, w));
  solve();
  KElement out;
  for (auto v : ids) join_into(out, vars_[v].value);
  return out;
}

std::map<std::pair<std::size_t, KWord>, KElement> Solver::table() const {
  std::map<std::pair<std::size_t, KWord>, KElement> out;
  for (const auto& v : vars_) out[{v.transition, v.word}] = v.value;
  return out;
}

KElement evaluate(const KAutomaton& product, Solver& solver) {
  const auto& a = product.automaton;
  const auto& ts = a.transitions();
  const auto n = a.state_count();

  // Backward segment values R_q for every epsilon source q.
  std::vector<AutState> sources;
  for (AutState q = 0; q < n; ++q) {
    if (a.is_control(q)) continue;
    if (std::ranges::any_of(a.out(q), [&](auto i) { return ts[i].kind == TKind::Epsilon; })) {
      sources.push_back(q);
    }
  }
  // segment[x] lists (q, R_q(x)) for thread-start states x.
  std::vector<std::vector<std::pair<AutState, KElement>>> segment(n);
  std::vector<char> starts(n, 0);
  for (const auto& t : ts) {
    if (t.kind == TKind::State) starts[t.to] = 1;
  }
  for (auto q : sources) {
    std::vector<KElement> r(n), delta(n);
    r[q] = delta[q] = KElement::one();
    std::deque<AutState> work{q};
    std::vector<char> queued(n, 0);
    queued[q] = 1;
    while (!work.empty()) {
      auto y = work.front();
      work.pop_front();
      queued[y] = 0;
      auto d = std::move(delta[y]);
      delta[y] = {};
      for (auto i : a.in(y)) {
        const auto& t = ts[i];
        if (t.kind != TKind::Symbol) continue;
        auto v = solver.apply(*product.label[i], d);
        KElement fresh;
        std::ranges::set_difference(v.words, r[t.from].words, std::back_inserter(fresh.words));
        if (fresh.empty()) continue;
        r[t.from] = join(r[t.from], fresh);
        delta[t.from] = join(delta[t.from], fresh);
        if (!queued[t.from]) {
          queued[t.from] = 1;
          work.push_back(t.from);
        }
      }
    }
    for (AutState x = 0; x < n; ++x) {
      if (starts[x] && !r[x].empty()) segment[x].push_back({q, std::move(r[x])});
    }
  }

  // Forward combination over thread boundaries.
  auto& memo = solver.memo();
  std::vector<KElement> val(n), delta(n);
  val[a.initial()] = delta[a.initial()] = KElement::one();
  std::deque<AutState> work{a.initial()};
  std::vector<char> queued(n, 0);
  queued[a.initial()] = 1;
  while (!work.empty()) {
    auto s = work.front();
    work.pop_front();
    queued[s] = 0;
    auto d = std::move(delta[s]);
    delta[s] = {};
    for (auto i : a.out(s)) {
      if (ts[i].kind != TKind::State) continue;
      for (const auto& [q, seg] : segment[ts[i].to]) {
        auto v = memo.sets(d, seg);
        for (auto e : a.out(q)) {
          if (ts[e].kind != TKind::Epsilon) continue;
          auto s2 = ts[e].to;
          KElement fresh;
          std::ranges::set_difference(v.words, val[s2].words, std::back_inserter(fresh.words));
          if (fresh.empty()) continue;
          val[s2] = join(val[s2], fresh);
          delta[s2] = join(delta[s2], fresh);
          if (!queued[s2]) {
            queued[s2] = 1;
            work.push_back(s2);
          }
        }
      }
    }
  }
  KElement out;
  for (AutState s = 0; s < n; ++s) {
    if (a.is_final(s)) join_into(out, val[s]);
  }
  return out;
}

}  // namespace sdpn
