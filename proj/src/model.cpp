#include "sdpn/model.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <utility>

namespace sdpn {

Action co_action(const Action& a) {
  if (!a.is_signal()) {
    throw std::invalid_argument("co_action: only signals have a co-action");
  }
  return Action::signal(a.channel(), a.polarity() == Polarity::Send
                                         ? Polarity::Receive
                                         : Polarity::Send);
}

std::size_t ConfigurationHash::operator()(const Configuration& c) const noexcept {
  std::size_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::size_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  };
  for (const auto& t : c.threads) {
    mix(0xffffffffu);
    mix(t.state);
    for (auto g : t.stack) mix(g);
  }
  return h;
}

namespace {

std::string channel_key(std::string_view name, std::string_view value) {
  std::string key(name);
  key.push_back('\0');
  key.append(value);
  return key;
}

}  // namespace

ChannelId Sdpn::add_channel(std::string name, std::string value) {
  auto key = channel_key(name, value);
  if (channel_index_.contains(key)) {
    throw ModelError("duplicate channel '" + name +
                     (value.empty() ? "" : "!" + value) + "'");
  }
  auto id = static_cast<ChannelId>(channels_.size());
  channels_.push_back({std::move(name), std::move(value)});
  channel_index_.emplace(std::move(key), id);
  return id;
}

StateId Sdpn::add_state(std::string name) {
  if (state_index_.contains(name) || symbol_index_.contains(name)) {
    throw ModelError("duplicate declaration of '" + name + "'");
  }
  auto id = static_cast<StateId>(states_.size());
  state_index_.emplace(name, id);
  states_.push_back(std::move(name));
  return id;
}

SymbolId Sdpn::add_symbol(std::string name, bool auxiliary) {
  if (state_index_.contains(name) || symbol_index_.contains(name)) {
    throw ModelError("duplicate declaration of '" + name + "'");
  }
  auto id = static_cast<SymbolId>(symbols_.size());
  symbol_index_.emplace(name, id);
  symbols_.push_back(std::move(name));
  auxiliary_.push_back(auxiliary);
  return id;
}

std::size_t Sdpn::add_rule(Rule rule) {
  auto check_thread = [this](const Thread& t) {
    if (t.state >= states_.size()) throw ModelError("rule uses unknown state");
    for (auto g : t.stack) {
      if (g >= symbols_.size()) throw ModelError("rule uses unknown symbol");
    }
  };
  if (rule.state >= states_.size() || rule.symbol >= symbols_.size()) {
    throw ModelError("rule head uses unknown state or symbol");
  }
  if (rule.action.is_signal() && rule.action.channel() >= channels_.size()) {
    throw ModelError("rule uses unknown channel");
  }
  check_thread(rule.target);
  if (rule.spawned) check_thread(*rule.spawned);
  auto index = rules_.size();
  by_head_[head_key(rule.state, rule.symbol)].push_back(index);
  rules_.push_back(std::move(rule));
  return index;
}

std::optional<ChannelId> Sdpn::find_channel(std::string_view name,
                                            std::string_view value) const {
  auto it = channel_index_.find(channel_key(name, value));
  if (it == channel_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<StateId> Sdpn::find_state(std::string_view name) const {
  auto it = state_index_.find(std::string(name));
  if (it == state_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<SymbolId> Sdpn::find_symbol(std::string_view name) const {
  auto it = symbol_index_.find(std::string(name));
  if (it == symbol_index_.end()) return std::nullopt;
  return it->second;
}

const std::vector<std::size_t>& Sdpn::rules_for(StateId state,
                                                SymbolId symbol) const {
  static const std::vector<std::size_t> kNone;
  auto it = by_head_.find(head_key(state, symbol));
  return it == by_head_.end() ? kNone : it->second;
}

std::optional<std::size_t> Sdpn::find_rule(std::string_view name) const {
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    if (rules_[i].name == name) return i;
  }
  return std::nullopt;
}

std::vector<Action> Sdpn::signal_actions() const {
  std::vector<Action> out;
  for (ChannelId c = 0; c < channels_.size(); ++c) {
    out.push_back(Action::signal(c, Polarity::Send));
    out.push_back(Action::signal(c, Polarity::Receive));
  }
  return out;
}

std::string Sdpn::format(const Action& a) const {
  switch (a.kind()) {
    case Action::Kind::Tau:
      return "tau";
    case Action::Kind::Silent:
      return "eps";
    case Action::Kind::Signal:
      break;
  }
  const auto& ch = channels_.at(a.channel());
  std::string out = ch.name;
  out.push_back(a.polarity() == Polarity::Send ? '!' : '?');
  out += ch.value;
  return out;
}

std::string Sdpn::format(const Thread& t) const {
  std::string out = states_.at(t.state);
  for (auto g : t.stack) {
    out.push_back(' ');
    out += symbols_.at(g);
  }
  return out;
}

std::string Sdpn::format(const Configuration& c) const {
  if (c.threads.empty()) return "EPS";
  std::string out;
  for (std::size_t i = 0; i < c.threads.size(); ++i) {
    if (i) out += " | ";
    out += format(c.threads[i]);
  }
  return out;
}

std::string Sdpn::format(const Rule& r) const {
  std::string out;
  if (!r.name.empty()) out = r.name + ": ";
  out += states_.at(r.state) + " " + symbols_.at(r.symbol) + " -" +
         format(r.action) + "-> ";
  if (r.spawned) out += format(*r.spawned) + " | ";
  out += format(r.target);
  return out;
}

bool Sdpn::operator==(const Sdpn& other) const {
  return channels_ == other.channels_ && states_ == other.states_ &&
         symbols_ == other.symbols_ && auxiliary_ == other.auxiliary_ &&
         rules_ == other.rules_;
}

// --- normalization ---------------------------------------------------------

namespace {

class Normalizer {
 public:
  explicit Normalizer(const Sdpn& source) : source_(source) {
    for (const auto& ch : source.channels()) out_.add_channel(ch.name, ch.value);
    for (const auto& s : source.states()) out_.add_state(s);
    for (SymbolId g = 0; g < source.symbols().size(); ++g) {
      out_.add_symbol(source.symbols()[g], source.is_auxiliary(g));
    }
  }

  Sdpn run() {
    for (const auto& r : source_.rules()) emit(r);
    return std::move(out_);
  }

 private:
  // A fresh symbol standing for `word` on top of a thread in `state`; the
  // helper rule state·Y -eps-> state·word is emitted once per pair.
  SymbolId stand_in(StateId state, const std::vector<SymbolId>& word,
                    const std::string& origin) {
    auto key = std::make_pair(state, word);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    std::string name;
    do {
      name = "_aux" + std::to_string(counter_++);
    } while (out_.find_symbol(name) || out_.find_state(name));
    auto y = out_.add_symbol(name, true);
    memo_.emplace(key, y);
    Rule helper;
    helper.name = origin.empty() ? std::string{} : origin + "'" + name;
    helper.state = state;
    helper.symbol = y;
    helper.action = Action::silent();
    helper.target = Thread{state, word};
    emit(helper);
    return y;
  }

  void emit(Rule r) {
    if (r.spawned) {
      for (Thread* t : {&*r.spawned, &r.target}) {
        if (t->stack.size() != 1) {
          t->stack = {stand_in(t->state, t->stack, r.name)};
        }
      }
    } else if (r.target.stack.size() > 2) {
      std::vector<SymbolId> upper(r.target.stack.begin(),
                                  r.target.stack.end() - 1);
      auto bottom = r.target.stack.back();
      r.target.stack = {stand_in(r.target.state, upper, r.name), bottom};
    }
    out_.add_rule(std::move(r));
  }

  const Sdpn& source_;
  Sdpn out_;
  std::map<std::pair<StateId, std::vector<SymbolId>>, SymbolId> memo_;
  std::size_t counter_ = 0;
};

}  // namespace

Sdpn normalize(const Sdpn& model) { return Normalizer(model).run(); }

bool is_normalized(const Sdpn& model) {
  return std::ranges::all_of(model.rules(), [](const Rule& r) {
    if (r.spawned) return r.spawned->stack.size() == 1 && r.target.stack.size() == 1;
    return r.target.stack.size() <= 2;
  });
}

// --- semantics -------------------------------------------------------------

Configuration apply_rule(const Configuration& c, std::size_t index,
                         const Rule& rule) {
  Configuration out;
  out.threads.reserve(c.threads.size() + (rule.spawned ? 1 : 0));
  for (std::size_t i = 0; i < c.threads.size(); ++i) {
    if (i != index) {
      out.threads.push_back(c.threads[i]);
      continue;
    }
    const auto& old = c.threads[i];
    if (rule.spawned) out.threads.push_back(*rule.spawned);
    Thread next{rule.target.state, rule.target.stack};
    next.stack.insert(next.stack.end(), old.stack.begin() + 1, old.stack.end());
    out.threads.push_back(std::move(next));
  }
  return out;
}

namespace {

struct Enabled {
  std::size_t thread;
  std::size_t rule;
};

std::vector<Enabled> enabled_rules(const Sdpn& model, const Configuration& c) {
  std::vector<Enabled> out;
  for (std::size_t i = 0; i < c.threads.size(); ++i) {
    const auto& t = c.threads[i];
    if (t.stack.empty()) continue;
    for (auto r : model.rules_for(t.state, t.stack.front())) out.push_back({i, r});
  }
  return out;
}

void sort_steps(std::vector<Step>& steps) {
  std::ranges::stable_sort(steps, {}, &Step::rules);
}

void add_synchronized(const Sdpn& model, const Configuration& c,
                      const std::vector<Enabled>& enabled,
                      std::vector<Step>& out) {
  const auto& rules = model.rules();
  for (std::size_t x = 0; x < enabled.size(); ++x) {
    const auto& left = enabled[x];
    const auto& a = rules[left.rule].action;
    if (!a.is_signal()) continue;
    auto partner = co_action(a);
    for (std::size_t y = x + 1; y < enabled.size(); ++y) {
      const auto& right = enabled[y];
      if (right.thread == left.thread) continue;
      if (rules[right.rule].action != partner) continue;
      // Rewrite the right thread first so the left index stays valid.
      auto mid = apply_rule(c, right.thread, rules[right.rule]);
      out.push_back({Action::tau(), {left.rule, right.rule},
                     apply_rule(mid, left.thread, rules[left.rule])});
    }
  }
}

}  // namespace

std::vector<Step> step_strict(const Sdpn& model, const Configuration& c) {
  auto enabled = enabled_rules(model, c);
  std::vector<Step> out;
  for (const auto& e : enabled) {
    const auto& r = model.rules()[e.rule];
    if (r.action.is_signal()) continue;
    out.push_back({r.action, {e.rule}, apply_rule(c, e.thread, r)});
  }
  add_synchronized(model, c, enabled, out);
  sort_steps(out);
  return out;
}

std::vector<Step> step_dpn(const Sdpn& model, const Configuration& c) {
  std::vector<Step> out;
  for (const auto& e : enabled_rules(model, c)) {
    const auto& r = model.rules()[e.rule];
    out.push_back({r.action, {e.rule}, apply_rule(c, e.thread, r)});
  }
  sort_steps(out);
  return out;
}

std::vector<Step> step_relaxed(const Sdpn& model, const Configuration& c) {
  auto enabled = enabled_rules(model, c);
  std::vector<Step> out;
  for (const auto& e : enabled) {
    const auto& r = model.rules()[e.rule];
    out.push_back({r.action, {e.rule}, apply_rule(c, e.thread, r)});
  }
  add_synchronized(model, c, enabled, out);
  sort_steps(out);
  return out;
}

bool replays_strict(const Sdpn& model, const Trace& trace) {
  const Configuration* current = &trace.start;
  for (const auto& step : trace.steps) {
    auto wanted = step.rules;
    std::ranges::sort(wanted);
    bool found = false;
    for (const auto& succ : step_strict(model, *current)) {
      auto have = succ.rules;
      std::ranges::sort(have);
      if (have == wanted && succ.result == step.result &&
          succ.action == step.action) {
        found = true;
        break;
      }
    }
    if (!found) return false;
    current = &step.result;
  }
  return true;
}

SearchResult bounded_search_strict(const Sdpn& model,
                                   const std::vector<Configuration>& init,
                                   const ConfigPredicate& target,
                                   const SearchOptions& options) {
  struct Node {
    Configuration config;
    std::size_t parent;
    std::size_t depth;
    Action action;
    std::vector<std::size_t> rules;
  };
  constexpr auto kRoot = static_cast<std::size_t>(-1);

  std::deque<Node> nodes;
  std::unordered_map<Configuration, std::size_t, ConfigurationHash> seen;
  SearchResult result;

  auto build_trace = [&](std::size_t index) {
    std::vector<std::size_t> chain;
    for (auto i = index; i != kRoot; i = nodes[i].parent) chain.push_back(i);
    std::ranges::reverse(chain);
    Trace trace{nodes[chain.front()].config, {}};
    for (std::size_t k = 1; k < chain.size(); ++k) {
      const auto& n = nodes[chain[k]];
      trace.steps.push_back({n.action, n.rules, n.config});
    }
    return trace;
  };

  for (const auto& c : init) {
    if (seen.contains(c)) continue;
    seen.emplace(c, nodes.size());
    nodes.push_back({c, kRoot, 0, Action::tau(), {}});
    if (target(c)) {
      result.status = SearchResult::Status::Found;
      result.trace = build_trace(nodes.size() - 1);
      result.explored = nodes.size();
      return result;
    }
  }

  bool truncated = false;
  for (std::size_t head = 0; head < nodes.size(); ++head) {
    if (nodes[head].depth >= options.depth) continue;
    auto successors = step_strict(model, nodes[head].config);
    for (auto& s : successors) {
      if (seen.contains(s.result)) continue;
      if (nodes.size() >= options.node_cap) {
        truncated = true;
        break;
      }
      seen.emplace(s.result, nodes.size());
      nodes.push_back({std::move(s.result), head, nodes[head].depth + 1,
                       s.action, std::move(s.rules)});
      if (target(nodes.back().config)) {
        result.status = SearchResult::Status::Found;
        result.trace = build_trace(nodes.size() - 1);
        result.explored = nodes.size();
        return result;
      }
    }
    if (truncated) break;
  }
  result.explored = nodes.size();
  result.status = truncated ? SearchResult::Status::BudgetExceeded
                            : SearchResult::Status::NotFound;
  return result;
}

}  // namespace sdpn
