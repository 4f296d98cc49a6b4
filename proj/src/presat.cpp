#include "sdpn/presat.hpp"

#include <deque>
#include <random>
#include <set>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

namespace sdpn {

namespace {

using Kind = Transition::Kind;

// A pending match: once an edge (x, g', z) exists for the keyed (x, g'),
// fire() extends the partial path.
struct Entry {
  enum class Type : std::uint8_t { Direct, Then, Spawn };
  Type type;
  AutState src;
  SymbolId symbol;
  std::uint32_t a = 0;  // Then: second symbol; Spawn: continuing state
  std::uint32_t b = 0;  // Spawn: continuing symbol

  auto operator<=>(const Entry&) const = default;
};

class Saturator {
 public:
  Saturator(const Sdpn& model, const MAutomaton& a, const SaturateOptions& options)
      : model_(model), a_(a) {
    if (options.shuffle_seed) rng_.emplace(*options.shuffle_seed);
  }

  MAutomaton run(SaturateStats* stats) {
    if (!is_normalized(model_)) throw std::invalid_argument("saturate: model is not normalized");
    auto original_states = a_.state_count();
    std::set<StateId> heads;
    for (const auto& r : model_.rules()) heads.insert(r.state);
    std::vector<AutState> controls;
    for (AutState s = 0; s < original_states; ++s) {
      if (a_.is_control(s)) controls.push_back(s);
    }
    for (auto s : controls) {
      for (auto p : heads) {
        if (!a_.successor(s, p)) a_.add_transition(s, Kind::State, p, a_.add_state(false));
      }
    }
    auto before = a_.transitions().size();
    for (auto s : controls) {
      for (const auto& r : model_.rules()) seed(s, r);
    }
    while (!work_.empty()) {
      std::size_t t;
      if (rng_) {
        std::uniform_int_distribution<std::size_t> pick(0, work_.size() - 1);
        auto i = pick(*rng_);
        t = work_[i];
        work_[i] = work_.back();
        work_.pop_back();
      } else {
        t = work_.front();
        work_.pop_front();
      }
      auto tr = a_.transitions()[t];
      auto it = pending_.find(key(tr.from, tr.label));
      if (it == pending_.end()) continue;
      for (std::size_t i = 0; i < it->second.size(); ++i) {
        auto e = it->second[i];
        fire(e, tr.to);
        it = pending_.find(key(tr.from, tr.label));
      }
    }
    if (stats) {
      stats->added_states = a_.state_count() - original_states;
      stats->added_transitions = a_.transitions().size() - before;
    }
    return std::move(a_);
  }

 private:
  static std::uint64_t key(AutState x, SymbolId g) {
    return (static_cast<std::uint64_t>(x) << 32) | g;
  }

  void seed(AutState s, const Rule& r) {
    auto src = *a_.successor(s, r.state);
    if (r.spawned) {
      if (auto x = a_.successor(s, r.spawned->state)) {
        enroll(*x, r.spawned->stack[0],
               {Entry::Type::Spawn, src, r.symbol, r.target.state, r.target.stack[0]});
      }
      return;
    }
    auto x = a_.successor(s, r.target.state);
    if (!x) return;
    const auto& w = r.target.stack;
    if (w.empty()) {
      add(src, r.symbol, *x);
    } else if (w.size() == 1) {
      enroll(*x, w[0], {Entry::Type::Direct, src, r.symbol});
    } else {
      enroll(*x, w[0], {Entry::Type::Then, src, r.symbol, w[1]});
    }
  }

  void enroll(AutState x, SymbolId g, const Entry& e) {
    if (!enrolled_.insert({key(x, g), e}).second) return;
    pending_[key(x, g)].push_back(e);
    std::vector<AutState> targets;
    for (auto i : a_.out(x)) {
      const auto& t = a_.transitions()[i];
      if (t.kind == Kind::Symbol && t.label == g) targets.push_back(t.to);
    }
    for (auto z : targets) fire(e, z);
  }

  void fire(const Entry& e, AutState z) {
    switch (e.type) {
      case Entry::Type::Direct:
        add(e.src, e.symbol, z);
        break;
      case Entry::Type::Then:
        enroll(z, e.a, {Entry::Type::Direct, e.src, e.symbol});
        break;
      case Entry::Type::Spawn: {
        std::vector<AutState> bridges;
        for (auto i : a_.out(z)) {
          const auto& t = a_.transitions()[i];
          if (t.kind == Kind::Epsilon) bridges.push_back(t.to);
        }
        for (auto s2 : bridges) {
          if (auto x = a_.successor(s2, e.a)) {
            enroll(*x, e.b, {Entry::Type::Direct, e.src, e.symbol});
          }
        }
        break;
      }
    }
  }

  void add(AutState from, SymbolId g, AutState to) {
    auto [idx, fresh] = a_.add_transition(from, Kind::Symbol, g, to, false);
    if (fresh) work_.push_back(idx);
  }

  const Sdpn& model_;
  MAutomaton a_;
  std::deque<std::size_t> work_;
  std::unordered_map<std::uint64_t, std::vector<Entry>> pending_;
  std::set<std::pair<std::uint64_t, Entry>> enrolled_;
  std::optional<std::mt19937_64> rng_;
};

}  // namespace

MAutomaton saturate(const Sdpn& model, const MAutomaton& a, const SaturateOptions& options,
                    SaturateStats* stats) {
  return Saturator(model, a, options).run(stats);
}

}  // namespace sdpn
