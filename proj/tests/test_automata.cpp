#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "sdpn/presat.hpp"
#include "support.hpp"

using namespace sdpn;
using namespace sdpn::test;

namespace {

using Kind = Transition::Kind;

Sdpn fig6_model() {
  Sdpn m;
  m.add_state("p1");
  m.add_state("p2");
  for (auto g : {"g1", "g2", "g3"}) m.add_symbol(g);
  return m;
}

// p1 g1+ p2 g2 g3, drawn as in the figure.
MAutomaton fig6() {
  MAutomaton a;
  auto s0 = a.add_state(true);
  auto x1 = a.add_state(false);
  auto x2 = a.add_state(false);
  auto s1 = a.add_state(true);
  auto y1 = a.add_state(false);
  auto y2 = a.add_state(false);
  auto y3 = a.add_state(false);
  auto s2 = a.add_state(true);
  a.set_initial(s0);
  a.set_final(s2);
  a.add_transition(s0, Kind::State, 0, x1);
  a.add_transition(x1, Kind::Symbol, 0, x2);
  a.add_transition(x2, Kind::Symbol, 0, x2);
  a.add_transition(x2, Kind::Epsilon, 0, s1);
  a.add_transition(s1, Kind::State, 1, y1);
  a.add_transition(y1, Kind::Symbol, 1, y2);
  a.add_transition(y2, Kind::Symbol, 2, y3);
  a.add_transition(y3, Kind::Epsilon, 0, s2);
  return a;
}

// Plain NFA acceptance on p1 w1 # p2 w2 # ... where # is read by epsilon edges.
bool nfa_accepts(const MAutomaton& a, const Configuration& c) {
  std::vector<std::pair<Kind, std::uint32_t>> tokens;
  for (const auto& t : c.threads) {
    tokens.emplace_back(Kind::State, t.state);
    for (auto g : t.stack) tokens.emplace_back(Kind::Symbol, g);
    tokens.emplace_back(Kind::Epsilon, 0);
  }
  std::set<AutState> cur{a.initial()};
  for (const auto& [kind, label] : tokens) {
    std::set<AutState> next;
    for (auto s : cur) {
      for (auto i : a.out(s)) {
        const auto& t = a.transitions()[i];
        if (t.kind == kind && t.label == label) next.insert(t.to);
      }
    }
    cur = std::move(next);
  }
  return std::ranges::any_of(cur, [&](AutState s) { return a.is_final(s); });
}

// Random valid M-automaton over `ns` states and `ng` symbols.
MAutomaton random_automaton(Rng& rng, std::size_t ns, std::size_t ng) {
  MAutomaton a;
  std::vector<AutState> controls;
  std::vector<AutState> stacks;
  auto nc = 1 + pick(rng, 3);
  for (std::size_t i = 0; i < nc; ++i) controls.push_back(a.add_state(true));
  for (auto s : controls) {
    for (StateId p = 0; p < ns; ++p) {
      if (chance(rng, 0.6)) {
        auto x = a.add_state(false);
        stacks.push_back(x);
        a.add_transition(s, Kind::State, p, x);
      }
    }
  }
  // s_p states keep their single predecessor; symbol edges end in inner states.
  std::vector<AutState> inner;
  for (std::size_t i = 1 + pick(rng, 3); i > 0; --i) {
    inner.push_back(a.add_state(false));
    stacks.push_back(inner.back());
  }
  for (std::size_t i = pick(rng, 8); i > 0; --i) {
    a.add_transition(stacks[pick(rng, stacks.size())], Kind::Symbol,
                     static_cast<std::uint32_t>(pick(rng, ng)), inner[pick(rng, inner.size())]);
  }
  for (std::size_t i = 1 + pick(rng, 4); i > 0; --i) {
    a.add_transition(stacks[pick(rng, stacks.size())], Kind::Epsilon, 0,
                     controls[pick(rng, controls.size())]);
  }
  a.set_initial(controls[0]);
  for (auto s : controls) {
    if (chance(rng, 0.5)) a.set_final(s);
  }
  return a;
}

std::vector<Configuration> all_configurations(const Sdpn& m, std::size_t max_threads,
                                              std::size_t max_stack) {
  std::vector<std::vector<SymbolId>> stacks{{}};
  for (std::size_t i = 0; i < stacks.size(); ++i) {
    if (stacks[i].size() == max_stack) continue;
    for (SymbolId g = 0; g < m.symbols().size(); ++g) {
      auto w = stacks[i];
      w.push_back(g);
      stacks.push_back(std::move(w));
    }
  }
  std::vector<Thread> threads;
  for (StateId p = 0; p < m.states().size(); ++p) {
    for (const auto& w : stacks) threads.push_back({p, w});
  }
  std::vector<Configuration> out{Configuration{}};
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].threads.size() == max_threads) continue;
    for (const auto& t : threads) {
      auto c = out[i];
      c.threads.push_back(t);
      out.push_back(std::move(c));
    }
  }
  return out;
}

std::string read(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("fig6 automaton") {
  auto m = fig6_model();
  auto a = fig6();
  CHECK_FALSE(a.validate());
  CHECK(a.accepts(parse_configuration("p1 g1 g1 p2 g2 g3", m)));
  CHECK(a.accepts(parse_configuration("p1 g1 | p2 g2 g3", m)));
  CHECK_FALSE(a.accepts(parse_configuration("p2 g2 g3", m)));
  CHECK_FALSE(a.accepts(parse_configuration("p1 | p2 g2 g3", m)));
  CHECK_FALSE(a.accepts(Configuration{}));
  auto b = fig6();
  b.set_final(b.initial());
  CHECK(b.accepts(Configuration{}));
}

TEST_CASE("validate reports violations") {
  SUBCASE("stack symbol edge leaving S_C") {
    auto a = fig6();
    a.add_transition(0, Kind::Symbol, 0, 1);
    auto err = a.validate();
    REQUIRE(err);
    CHECK(err->find("leaves S_C") != std::string::npos);
  }
  SUBCASE("two successors on one state symbol") {
    auto a = fig6();
    auto x = a.add_state(false);
    a.add_transition(0, Kind::State, 0, x);
    CHECK(a.validate());
  }
  SUBCASE("shared s_p") {
    auto a = fig6();
    a.add_transition(3, Kind::State, 0, 1);
    CHECK(a.validate());
  }
  SUBCASE("epsilon into S_S") {
    auto a = fig6();
    a.add_transition(2, Kind::Epsilon, 0, 4);
    CHECK(a.validate());
  }
  SUBCASE("final stack state") {
    auto a = fig6();
    a.set_final(1);
    CHECK(a.validate());
  }
  CHECK(MAutomaton{}.validate());
}

TEST_CASE("from_pattern") {
  auto m = fig6_model();
  auto a = from_pattern(parse_config_pattern("p1 g1+ p2 g2 g3", m), m);
  CHECK_FALSE(a.validate());
  auto ref = fig6();
  for (const auto& c : all_configurations(m, 2, 3)) {
    CAPTURE(m.format(c));
    REQUIRE(a.accepts(c) == ref.accepts(c));
  }

  auto any = from_pattern(parse_config_pattern("ANY*", m), m);
  CHECK_FALSE(any.validate());
  for (const auto& c : all_configurations(m, 2, 2)) REQUIRE(any.accepts(c));

  auto driver = load_model_file(model_path("driver.sdpn")).model;
  auto target = from_pattern(parse_config_pattern("ANY* p3 R ANY* p4 A .* ANY*", driver), driver);
  CHECK(target.accepts(parse_configuration("p0 1 0 p1 TSF p2 TSE p3 R p4 A p5 g0", driver)));
  CHECK_FALSE(target.accepts(parse_configuration("p0 1 0 p1 TSF p2 TSE p3 R p5 g0", driver)));
}

TEST_CASE("from_pattern agrees with pattern matching") {
  Rng rng(31);
  for (int i = 0; i < 1000; ++i) {
    auto m = random_model(rng);
    auto text = random_pattern(rng, m);
    auto pattern = parse_config_pattern(text, m);
    auto a = from_pattern(pattern, m);
    REQUIRE_FALSE(a.validate());
    auto c = random_configuration(rng, m, 3, 3, true);
    CAPTURE(text);
    CAPTURE(m.format(c));
    REQUIRE(a.accepts(c) == pattern_matches(pattern, m, c));
  }
}

TEST_CASE("accepts agrees with NFA acceptance") {
  Rng rng(32);
  Sdpn m;
  m.add_state("p");
  m.add_state("q");
  for (auto g : {"a", "b", "c"}) m.add_symbol(g);
  std::size_t accepted = 0;
  for (int i = 0; i < 300; ++i) {
    auto a = random_automaton(rng, 2, 3);
    REQUIRE_FALSE(a.validate());
    for (int k = 0; k < 20; ++k) {
      auto c = random_configuration(rng, m, 3, 3, true);
      bool got = a.accepts(c);
      accepted += got;
      REQUIRE(got == nfa_accepts(a, c));
    }
  }
  CHECK(accepted > 0);
}

TEST_CASE("intersect") {
  auto m = fig6_model();
  auto pattern = [&](const char* text) { return from_pattern(parse_config_pattern(text, m), m); };
  auto configs = all_configurations(m, 2, 2);

  SUBCASE("with ANY*") {
    auto a = pattern("p1 g1+ p2 [g2 g3]*");
    auto k = intersect(a, pattern("ANY*"));
    for (const auto& c : configs) REQUIRE(k.automaton.accepts(c) == a.accepts(c));
  }
  SUBCASE("disjoint languages") {
    auto k = intersect(pattern("p1 g1 ANY*"), pattern("p2 ANY*"));
    for (AutState s = 0; s < k.automaton.state_count(); ++s) CHECK_FALSE(k.automaton.is_final(s));
  }
  SUBCASE("random pairs agree with both") {
    Rng rng(33);
    for (int i = 0; i < 200; ++i) {
      auto a = random_automaton(rng, 2, 3);
      auto b = random_automaton(rng, 2, 3);
      auto k = intersect(a, b);
      REQUIRE(k.label.size() == k.automaton.transitions().size());
      for (std::size_t t = 0; t < k.label.size(); ++t) {
        const auto& tr = k.automaton.transitions()[t];
        REQUIRE(k.label[t].has_value() == (tr.kind == Kind::Symbol));
        if (k.label[t]) CHECK(a.transitions()[*k.label[t]].label == tr.label);
      }
      for (const auto& c : configs) {
        REQUIRE(k.automaton.accepts(c) == (a.accepts(c) && b.accepts(c)));
      }
    }
  }
}

TEST_CASE("enumerate lists accepted configurations") {
  auto m = fig6_model();
  auto a = from_pattern(parse_config_pattern("p1 g1+ p2 g2 g3", m), m);
  auto got = enumerate(a, 2, 3, 100);
  std::set<std::string> names;
  for (const auto& c : got) names.insert(m.format(c));
  CHECK(names == std::set<std::string>{"p1 g1 | p2 g2 g3", "p1 g1 g1 | p2 g2 g3",
                                       "p1 g1 g1 g1 | p2 g2 g3"});
  CHECK(enumerate(a, 2, 3, 2).size() == 2);
}

TEST_CASE("golden dumps") {
  auto p = make_problem(load_model_file(model_path("fig7.sdpn")).model, "p m0", "ANY* p m2 ANY*");
  auto apre = saturate(p.model, p.target_automaton);
  CHECK(p.target_automaton.dump(p.model) == read(std::string(SDPN_GOLDEN_DIR) + "/fig7_target.txt"));
  CHECK(apre.dump(p.model) == read(std::string(SDPN_GOLDEN_DIR) + "/fig7_apre.txt"));
}
