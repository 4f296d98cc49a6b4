#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "support.hpp"

using namespace sdpn;
using namespace sdpn::test;

namespace {

std::string read(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kSmall = R"(
channels:
  incr
  c : 0 1
states:
  p0
stack:
  one
rules:
  r: p0 one -recv incr-> p0 one one
)";

}  // namespace

TEST_CASE("parse_sdpn reads rules") {
  auto m = parse_sdpn(kSmall);
  REQUIRE(m.rules().size() == 1);
  const auto& r = m.rules()[0];
  CHECK(r.name == "r");
  CHECK(m.states()[r.state] == "p0");
  CHECK(m.symbols()[r.symbol] == "one");
  CHECK(r.action == Action::signal(*m.find_channel("incr"), Polarity::Receive));
  CHECK_FALSE(r.is_spawn());
  CHECK(r.target.stack.size() == 2);
  CHECK(m.find_channel("c", "1"));
  CHECK(m.format(r) == "r: p0 one -incr?-> p0 one one");
}

TEST_CASE("action syntax") {
  auto m = parse_sdpn(R"(
channels:
  a
  v : x y
states:
  p
stack:
  g
rules:
  t: p g -tau-> p
  e: p g -eps-> p
  s: p g -a!-> p
  r: p g -a?-> p
  vs: p g -v!y-> p
  vr: p g -recv v x-> p
)");
  const auto& rs = m.rules();
  CHECK(rs[0].action.is_tau());
  CHECK(rs[1].action.is_silent());
  CHECK(rs[2].action == Action::signal(0, Polarity::Send));
  CHECK(rs[3].action == Action::signal(0, Polarity::Receive));
  CHECK(rs[4].action == Action::signal(*m.find_channel("v", "y"), Polarity::Send));
  CHECK(rs[5].action == Action::signal(*m.find_channel("v", "x"), Polarity::Receive));
}

TEST_CASE("empty rule section") {
  auto m = parse_sdpn("channels:\nstates:\n  p\nstack:\n  g\nrules:\n");
  CHECK(m.rules().empty());
  CHECK(m.states().size() == 1);
}

TEST_CASE("parse errors carry positions") {
  auto undeclared = "channels:\nstates:\n  p\nstack:\n  g\nrules:\n  p g -tau-> q g\n";
  try {
    parse_sdpn(undeclared);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 7);
    CHECK(std::string(e.what()).find("q") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_sdpn("states:\n  p p\n"), ParseError);
  CHECK_THROWS_AS(parse_sdpn("stack:\n  g\nstack:\n  g\n"), ParseError);
  CHECK_THROWS_AS(parse_sdpn("channels:\n  a a\n"), ParseError);
  CHECK_THROWS_AS(parse_sdpn("states:\n  p\nstack:\n  g\nrules:\n  x: p g -tau-> p\n  x: p g -tau-> p\n"),
                  ParseError);
  CHECK_THROWS_AS(parse_sdpn("states:\n  p\nstack:\n  g\nrules:\n  p g -b!-> p\n"), ParseError);
  CHECK_THROWS_AS(parse_sdpn("p g -tau-> p\n"), ParseError);
  CHECK_THROWS_AS(parse_sdpn("states:\n  p\nstack:\n  g\nrules:\n  p g -tau- p\n"), ParseError);
}

TEST_CASE("parse/print round trip") {
  auto m = parse_sdpn(kSmall);
  CHECK(parse_sdpn(print_sdpn(m)) == m);
  CHECK(print_sdpn(parse_sdpn(print_sdpn(m))) == print_sdpn(m));
  for (const char* f : {"fig7.sdpn", "fig8.sdpn", "driver.sdpn", "driver-fixed.sdpn"}) {
    CAPTURE(f);
    auto model = parse_sdpn(read(model_path(f)));
    auto text = print_sdpn(model);
    CHECK(parse_sdpn(text) == model);
    CHECK(print_sdpn(parse_sdpn(text)) == text);
  }
  Rng rng(21);
  for (int i = 0; i < 100; ++i) {
    auto model = random_model(rng);
    CHECK(parse_sdpn(print_sdpn(model)) == model);
  }
}

TEST_CASE("configuration patterns") {
  auto driver = load_model_file(model_path("driver.sdpn")).model;
  auto target = parse_config_pattern("ANY* p3 R ANY* p4 A .* ANY*", driver);
  CHECK(target.items.size() == 5);
  auto final_config = parse_configuration("p0 1 0 p1 TSF p2 TSE p3 R p4 A p5 g0", driver);
  CHECK(pattern_matches(target, driver, final_config));
  CHECK_FALSE(pattern_matches(target, driver, parse_configuration("p3 R | p4 r0", driver)));
  CHECK(pattern_matches(target, driver, parse_configuration("p3 R | p4 A 1 0", driver)));
  CHECK_FALSE(pattern_matches(target, driver, parse_configuration("p4 A | p3 R", driver)));

  Sdpn m;
  m.add_state("p1");
  m.add_state("p2");
  for (auto g : {"g1", "g2", "g3"}) m.add_symbol(g);
  auto fig6 = parse_config_pattern("p1 g1+ p2 g2 g3", m);
  CHECK(pattern_matches(fig6, m, parse_configuration("p1 g1 g1 p2 g2 g3", m)));
  CHECK(pattern_matches(fig6, m, parse_configuration("p1 g1 | p2 g2 g3", m)));
  CHECK_FALSE(pattern_matches(fig6, m, parse_configuration("p1 p2 g2 g3", m)));
  CHECK_FALSE(pattern_matches(fig6, m, parse_configuration("p2 g2 g3", m)));

  CHECK_THROWS_AS(parse_config_pattern("", m), ParseError);
  CHECK_THROWS_AS(parse_config_pattern("   ", m), ParseError);
  CHECK_THROWS_AS(parse_config_pattern("p9 g1", m), ParseError);
  CHECK_THROWS_AS(parse_config_pattern("p1 g7", m), ParseError);
  CHECK_THROWS_AS(parse_config_pattern("p1 (g1", m), ParseError);
  auto eps = parse_config_pattern("EPS", m);
  CHECK(eps.items.empty());
  CHECK(pattern_matches(eps, m, Configuration{}));
  CHECK_FALSE(pattern_matches(eps, m, parse_configuration("p1", m)));
}

TEST_CASE("pattern syntax") {
  Sdpn m;
  m.add_state("p");
  m.add_state("q");
  for (auto g : {"a", "b", "c"}) m.add_symbol(g);
  auto match = [&](const char* pattern, const char* config) {
    return pattern_matches(parse_config_pattern(pattern, m), m, parse_configuration(config, m));
  };
  CHECK(match("_ a", "q a"));
  CHECK(match("{p,q} a", "p a"));
  CHECK(match("p [a b]*", "p a b b a"));
  CHECK_FALSE(match("p [a b]*", "p a c"));
  CHECK(match("p (a|b c)*", "p b c a"));
  CHECK_FALSE(match("p (a|b c)*", "p b a"));
  CHECK(match("p a? b", "p b"));
  CHECK(match("p .", "p c"));
  CHECK_FALSE(match("p .", "p"));
  CHECK(match("ANY*", "p a | q b"));
  CHECK(match("p a | q", "p a q"));
  CHECK(match("ANY* q", "p a | q"));
}

TEST_CASE("cfg_to_sdpn statements") {
  auto prog = parse_cfgp(R"(
channel c : 0 1
threadlocal g : 0 1 = 0
thread T {
  local l : 0 1
  entry n0
  n0 -> n1 : l = 1
  n1 -> n2 : spawn U
  n2 -> n3 : send c l
  n3 -> n4 : call F
  n4 -> n5 : recv c g
}
thread U {
  entry u0
  u0 -> u1 : skip
}
proc F {
  entry f0
  f0 -> f1 : return
}
main T
)");
  auto t = cfg_to_sdpn(prog);
  const auto& m = t.model;
  CHECK(m.format(t.init) == "g:g=0 T.n0:l=0");
  auto find = [&](const std::string& text) {
    return std::ranges::any_of(m.rules(), [&](const Rule& r) { return m.format(r) == text; });
  };
  // Assignment: g1 (n1, l1) -tau-> g1 (n2, l2).
  CHECK(find("g:g=0 T.n0:l=0 -tau-> g:g=0 T.n1:l=1"));
  CHECK(find("g:g=1 T.n0:l=1 -tau-> g:g=1 T.n1:l=1"));
  // Spawn: the new thread starts at its entry with initial values, on the left.
  CHECK(find("g:g=0 T.n1:l=1 -tau-> g:g=0 U.u0 | g:g=0 T.n2:l=1"));
  CHECK(find("g:g=1 T.n1:l=1 -tau-> g:g=0 U.u0 | g:g=1 T.n2:l=1"));
  // Send of the value of l.
  CHECK(find("g:g=0 T.n2:l=1 -c!1-> g:g=0 T.n3:l=1"));
  CHECK_FALSE(find("g:g=0 T.n2:l=1 -c!0-> g:g=0 T.n3:l=1"));
  // Call: callee frame on top of the return site.
  CHECK(find("g:g=1 T.n3:l=0 -tau-> g:g=1 F.f0 T.n4:l=0"));
  // Return pops the frame.
  CHECK(find("g:g=0 F.f0 -tau-> g:g=0"));
  // Receive into a thread-local changes the control state.
  CHECK(find("g:g=0 T.n4:l=1 -c?1-> g:g=1 T.n5:l=1"));
  CHECK(find("g:g=1 T.n4:l=1 -c?0-> g:g=0 T.n5:l=1"));
}

TEST_CASE("cfg_to_sdpn desk trace oracle") {
  // One spawn and one send/receive pair.
  auto t = cfg_to_sdpn(parse_cfgp(R"(
channel c
thread A {
  entry a0
  a0 -> a1 : spawn B
  a1 -> a2 : send c
}
thread B {
  entry b0
  b0 -> b1 : recv c
}
main A
)"));
  const auto& m = t.model;
  std::set<std::vector<std::string>> traces;
  std::vector<std::pair<Configuration, std::vector<std::string>>> work{{t.init, {}}};
  while (!work.empty()) {
    auto [c, seq] = work.back();
    work.pop_back();
    traces.insert(seq);
    if (seq.size() == 4) continue;
    for (const auto& s : step_strict(m, c)) {
      auto next = seq;
      next.push_back(m.format(s.result));
      work.push_back({s.result, next});
    }
  }
  std::set<std::vector<std::string>> expected = {
      {},
      {"g B.b0 | g A.a1"},
      {"g B.b0 | g A.a1", "g B.b1 | g A.a2"},
  };
  CHECK(traces == expected);
}

TEST_CASE("cfg_to_sdpn procedure results") {
  auto t = load_model_file(model_path("pingpong.cfgp"));
  const auto& m = t.model;
  auto target = from_pattern(parse_config_pattern("ANY* _ Main.m4:x=1 ANY*", m), m);
  auto r = bounded_search_strict(
      m, {t.init}, [&](const Configuration& c) { return target.accepts(c); }, {8, 100000});
  REQUIRE(r.status == SearchResult::Status::Found);
  CHECK(r.trace->steps.size() == 6);
  auto never = from_pattern(parse_config_pattern("ANY* _ Main.m4:x=0 ANY*", m), m);
  auto r0 = bounded_search_strict(
      m, {t.init}, [&](const Configuration& c) { return never.accepts(c); }, {12, 100000});
  CHECK(r0.status == SearchResult::Status::NotFound);
}

TEST_CASE("cfgp errors") {
  CHECK_THROWS_AS(parse_cfgp("thread T {\n entry a\n"), ParseError);
  CHECK_THROWS_AS(parse_cfgp("thread T {\n entry a\n a -> b : jump\n}\nmain T\n"), ParseError);
  CHECK_THROWS_AS(parse_cfgp("thread T {\n entry a\n}\n"), ParseError);
  CHECK_THROWS_AS(parse_cfgp("threadlocal x : = 0\nmain T\n"), ParseError);
  CHECK_THROWS_AS(cfg_to_sdpn(parse_cfgp("thread T {\n entry a\n a -> b : call G\n}\nmain T\n")),
                  ParseError);
  CHECK_THROWS_AS(cfg_to_sdpn(parse_cfgp("thread T {\n entry a\n a -> b : spawn G\n}\nmain T\n")),
                  ParseError);
  auto big = parse_cfgp(R"(
threadlocal a : 0 1 2 3 4 5 6 7 8 9
threadlocal b : 0 1 2 3 4 5 6 7 8 9
threadlocal c : 0 1 2 3 4 5 6 7 8 9
thread T {
  entry n
}
main T
)");
  TranslateOptions small;
  small.state_cap = 500;
  CHECK_THROWS_AS(cfg_to_sdpn(big, small), ModelError);
  CHECK_NOTHROW(cfg_to_sdpn(big));
}
