#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <tuple>

#include "sdpn/presat.hpp"
#include "support.hpp"

using namespace sdpn;
using namespace sdpn::test;

namespace {

using Edge = std::tuple<AutState, Transition::Kind, std::uint32_t, AutState>;

std::set<Edge> edges(const MAutomaton& a) {
  std::set<Edge> out;
  for (const auto& t : a.transitions()) out.insert({t.from, t.kind, t.label, t.to});
  return out;
}

MAutomaton pattern(const Sdpn& m, const char* text) {
  return from_pattern(parse_config_pattern(text, m), m);
}

}  // namespace

TEST_CASE("no rules leaves the automaton unchanged") {
  auto m = parse_sdpn("states:\n  p q\nstack:\n  g h\n");
  auto a = pattern(m, "ANY* p g h ANY*");
  SaturateStats stats;
  auto apre = saturate(m, a, {}, &stats);
  CHECK(apre.dump(m) == a.dump(m));
  CHECK(stats.added_transitions == 0);
  CHECK(stats.added_states == 0);
}

TEST_CASE("pop rule (R1)") {
  auto m = parse_sdpn("states:\n  p p2\nstack:\n  g\nrules:\n  pop: p g -tau-> p2\n");
  auto a = pattern(m, "p2");
  CHECK_FALSE(a.accepts(parse_configuration("p g", m)));
  auto apre = saturate(m, a);
  CHECK_FALSE(apre.validate());
  CHECK(apre.accepts(parse_configuration("p g", m)));
  CHECK(apre.accepts(parse_configuration("p2", m)));
  CHECK_FALSE(apre.accepts(parse_configuration("p g g", m)));
  // The added edge is s_p -g-> s_p2 and is marked as added.
  auto s = apre.initial();
  auto sp = apre.successor(s, *m.find_state("p"));
  auto sp2 = apre.successor(s, *m.find_state("p2"));
  REQUIRE(sp);
  REQUIRE(sp2);
  auto t = apre.find(*sp, Transition::Kind::Symbol, *m.find_symbol("g"), *sp2);
  REQUIRE(t);
  CHECK_FALSE(apre.transitions()[*t].original);
}

TEST_CASE("spawn rule (R2)") {
  auto m = parse_sdpn(R"(
states:
  p p1 p2
stack:
  g g1 g2
rules:
  s: p g -tau-> p1 g1 | p2 g2
)");
  auto a = pattern(m, "p1 g1 p2 g2");
  auto apre = saturate(m, a);
  CHECK_FALSE(apre.validate());
  CHECK(apre.accepts(parse_configuration("p g", m)));
  CHECK_FALSE(apre.accepts(parse_configuration("p2 g2 | p1 g1", m)));
  // The spawned thread is on the left.
  auto b = saturate(m, pattern(m, "p2 g2 p1 g1"));
  CHECK_FALSE(b.accepts(parse_configuration("p g", m)));
}

TEST_CASE("saturation only adds transitions") {
  Rng rng(41);
  for (int i = 0; i < 200; ++i) {
    auto m = normalize(random_model(rng));
    auto a = from_pattern(parse_config_pattern(random_pattern(rng, m), m), m);
    auto apre = saturate(m, a);
    REQUIRE_FALSE(apre.validate());
    CHECK(apre.initial() == a.initial());
    for (AutState s = 0; s < a.state_count(); ++s) {
      CHECK(apre.is_final(s) == a.is_final(s));
      CHECK(apre.is_control(s) == a.is_control(s));
    }
    for (std::size_t t = 0; t < a.transitions().size(); ++t) {
      CHECK(apre.transitions()[t].same_edge(a.transitions()[t]));
      CHECK(apre.transitions()[t].original);
    }
    std::size_t stack_states = 0;
    for (AutState s = 0; s < apre.state_count(); ++s) stack_states += !apre.is_control(s);
    for (std::size_t t = a.transitions().size(); t < apre.transitions().size(); ++t) {
      const auto& tr = apre.transitions()[t];
      if (tr.kind == Transition::Kind::Symbol) CHECK_FALSE(tr.original);
    }
    CHECK(apre.symbol_transition_count() <=
          stack_states * m.symbols().size() * apre.state_count());
  }
}

TEST_CASE("result does not depend on the worklist order") {
  Rng rng(42);
  for (int i = 0; i < 200; ++i) {
    auto m = normalize(random_model(rng));
    auto a = from_pattern(parse_config_pattern(random_pattern(rng, m), m), m);
    auto fifo = edges(saturate(m, a));
    for (std::uint64_t seed : {1, 2, 3}) REQUIRE(edges(saturate(m, a, {seed})) == fifo);
  }
}

TEST_CASE("saturation accepts every relaxed predecessor") {
  Rng rng(43);
  std::size_t reaching = 0;
  for (int i = 0; i < 150; ++i) {
    auto m = normalize(random_model(rng));
    auto text = random_pattern(rng, m);
    auto a = from_pattern(parse_config_pattern(text, m), m);
    auto apre = saturate(m, a);
    ReachOracle oracle(m, a);
    for (int k = 0; k < 40; ++k) {
      auto c = random_configuration(rng, m, 3, 3);
      if (!oracle.reaches(c, 5)) continue;
      ++reaching;
      CAPTURE(text);
      CAPTURE(m.format(c));
      REQUIRE(apre.accepts(c));
    }
  }
  CHECK(reaching > 500);
}

TEST_CASE("saturate requires a normalized model") {
  auto m = parse_sdpn("states:\n  p\nstack:\n  g\nrules:\n  r: p g -tau-> p g g g\n");
  CHECK_THROWS_AS(saturate(m, pattern(m, "ANY*")), std::invalid_argument);
}
