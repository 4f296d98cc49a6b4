// sdpn: reachability checks for synchronized dynamic pushdown networks.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "sdpn/abstraction.hpp"
#include "sdpn/automata.hpp"
#include "sdpn/cegar.hpp"
#include "sdpn/ingest.hpp"
#include "sdpn/presat.hpp"

namespace {

constexpr int kUsage = 64;
constexpr int kResource = 65;

struct Common {
  std::string model;
  std::string init;
  std::string target;
};

sdpn::Problem load(const Common& c) {
  auto t = sdpn::load_model_file(c.model);
  auto init = c.init;
  if (init.empty()) {
    if (t.init.threads.empty()) throw CLI::ValidationError("--init", "required for .sdpn models");
    init = t.model.format(t.init);
  }
  return sdpn::make_problem(t.model, init, c.target);
}

void print_trace(const sdpn::Sdpn& m, const sdpn::Trace& t) {
  std::cout << "start: " << m.format(t.start) << "\n";
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const auto& s = t.steps[i];
    std::cout << i + 1 << ". ";
    for (std::size_t k = 0; k < s.rules.size(); ++k) {
      if (k) std::cout << " <-> ";
      const auto& r = m.rules()[s.rules[k]];
      std::cout << (r.name.empty() ? "#" + std::to_string(s.rules[k]) : r.name);
    }
    std::cout << " [" << m.format(s.action) << "]: " << m.format(s.result) << "\n";
  }
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

void emit_automata(const sdpn::Problem& p, const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto apre = sdpn::saturate(p.model, p.target_automaton);
  write_file(dir + "/init.aut", p.init_automaton.dump(p.model));
  write_file(dir + "/target.aut", p.target_automaton.dump(p.model));
  write_file(dir + "/apre.aut", apre.dump(p.model));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reachability analysis for synchronized dynamic pushdown networks"};
  app.require_subcommand(1);

  Common common;
  std::string mode = "cegar";
  std::string abstraction = "both";
  std::size_t order = 1;
  std::size_t max_order = 4;
  std::optional<std::size_t> budget;
  std::string report;
  std::string automata_dir;
  sdpn::CegarOptions cegar;

  auto* check = app.add_subcommand("check", "abstract reachability check or refinement loop");
  check->add_option("--model", common.model, "model file (.sdpn or .cfgp)")->required();
  check->add_option("--init", common.init, "initial configuration pattern");
  check->add_option("--target", common.target, "target configuration pattern")->required();
  check->add_option("--mode", mode, "order or cegar")->check(CLI::IsMember({"order", "cegar"}));
  check->add_option("--abstraction", abstraction, "prefix, suffix or both")
      ->check(CLI::IsMember({"prefix", "suffix", "both"}));
  check->add_option("--order", order, "abstraction order for --mode order")->check(CLI::PositiveNumber);
  check->add_option("--max-order", max_order, "highest order tried by --mode cegar")
      ->check(CLI::PositiveNumber);
  check->add_option("--budget", budget, "validation depth (default: current order)");
  check->add_option("--report", report, "write a JSON report");
  check->add_option("--emit-automata", automata_dir, "dump automata into this directory");
  check->add_option("--node-cap", cegar.validation.node_cap, "validation search node cap");
  check->add_option("--variable-cap", cegar.check.variable_cap, "label variable cap");

  std::size_t depth = 0;
  std::size_t node_cap = 2'000'000;
  auto* simulate = app.add_subcommand("simulate", "bounded strict-semantics search");
  simulate->add_option("--model", common.model, "model file (.sdpn or .cfgp)")->required();
  simulate->add_option("--init", common.init, "initial configuration pattern");
  simulate->add_option("--target", common.target, "target configuration pattern")->required();
  simulate->add_option("--depth", depth, "search depth")->required();
  simulate->add_option("--node-cap", node_cap, "search node cap");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    auto rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    auto problem = load(common);
    if (*simulate) {
      sdpn::ValidateOptions vo;
      vo.node_cap = node_cap;
      auto init = sdpn::enumerate(problem.init_automaton, vo.max_threads, vo.max_stack,
                                  vo.max_configs);
      const auto& target = problem.target_automaton;
      auto r = sdpn::bounded_search_strict(
          problem.model, init, [&](const sdpn::Configuration& c) { return target.accepts(c); },
          {depth, node_cap});
      if (r.status == sdpn::SearchResult::Status::Found) {
        print_trace(problem.model, *r.trace);
        return 0;
      }
      std::cout << "none\n";
      if (r.status == sdpn::SearchResult::Status::BudgetExceeded) {
        std::cerr << "node cap reached after " << r.explored << " configurations\n";
        return kResource;
      }
      return 0;
    }

    if (!automata_dir.empty()) emit_automata(problem, automata_dir);
    cegar.use_prefix = abstraction != "suffix";
    cegar.use_suffix = abstraction != "prefix";
    nlohmann::json out;
    int rc = 2;
    if (mode == "order") {
      nlohmann::json checks = nlohmann::json::array();
      bool proven = false;
      for (auto k : {sdpn::AbstractionKind::Prefix, sdpn::AbstractionKind::Suffix}) {
        if (k == sdpn::AbstractionKind::Prefix ? !cegar.use_prefix : !cegar.use_suffix) continue;
        auto r = sdpn::check_order(problem, sdpn::KDomain(k, order), cegar.check);
        std::cout << sdpn::to_string(k) << " order " << order << ": "
                  << sdpn::format_element(problem.model, r.paths) << " -> "
                  << (r.proven ? "proven" : "counterexample tau^" + std::to_string(*r.j)) << "\n";
        proven = proven || r.proven;
        checks.push_back(sdpn::check_to_json(problem.model, r));
      }
      rc = proven ? 0 : 2;
      out = {{"mode", "order"},
             {"outcome", proven ? "unreachable" : "unknown"},
             {"configuration",
              {{"init", problem.init_text}, {"target", problem.target_text}, {"order", order},
               {"abstraction", abstraction}}},
             {"checks", checks}};
    } else {
      cegar.max_order = max_order;
      cegar.budget = budget;
      auto v = sdpn::run_cegar(problem, cegar);
      out = sdpn::verdict_to_json(problem, cegar, v);
      out["mode"] = "cegar";
      std::cout << sdpn::to_string(v.outcome);
      if (v.outcome == sdpn::Verdict::Outcome::Unreachable) {
        std::cout << " (" << sdpn::to_string(v.kind) << " order " << v.order << ")";
      } else if (v.outcome == sdpn::Verdict::Outcome::Reachable) {
        std::cout << " (order " << v.order << ", trace length " << v.trace->steps.size() << ")";
      }
      std::cout << "\n";
      if (v.trace) print_trace(problem.model, *v.trace);
      for (const auto& rec : v.history) {
        if (rec.error) std::cerr << "order " << rec.order << ": " << *rec.error << "\n";
      }
      rc = v.outcome == sdpn::Verdict::Outcome::Unreachable ? 0
           : v.outcome == sdpn::Verdict::Outcome::Reachable ? 1
                                                              : 2;
    }
    if (!report.empty()) write_file(report, out.dump(2) + "\n");
    return rc;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const sdpn::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kUsage;
  } catch (const sdpn::ModelError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return kUsage;
  } catch (const sdpn::ResourceLimit& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return kResource;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
