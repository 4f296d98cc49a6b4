#include "sdpn/cegar.hpp"

#include <algorithm>

#include "sdpn/presat.hpp"

namespace sdpn {

namespace {

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

Problem make_problem(const Sdpn& model, const std::string& init, const std::string& target) {
  Problem p;
  p.model = normalize(model);
  p.init_text = init;
  p.target_text = target;
  p.init = parse_config_pattern(init, p.model);
  p.target = parse_config_pattern(target, p.model);
  p.init_automaton = from_pattern(p.init, p.model);
  p.target_automaton = from_pattern(p.target, p.model);
  return p;
}

CheckResult check_order(const Problem& problem, const KDomain& domain,
                        const CheckOptions& options) {
  auto t0 = std::chrono::steady_clock::now();
  CheckResult r;
  r.kind = domain.kind();
  r.order = domain.order();
  auto apre = saturate(problem.model, problem.target_automaton);
  auto system = generate_constraints(problem.model, apre);
  auto product = intersect(apre, problem.init_automaton);
  SolverOptions so;
  so.variable_cap = options.variable_cap;
  Solver solver(system, domain, so);
  r.paths = evaluate(product, solver);
  r.meet = meet(r.paths, domain.tau_star());
  r.proven = r.meet.empty();
  if (!r.proven) r.j = std::ranges::min(r.meet.words, {}, &KWord::size).size();
  r.apre_transitions = apre.transitions().size();
  r.constraints = system.size();
  r.solver = solver.stats();
  r.seconds = since(t0);
  return r;
}

Validation validate(const Problem& problem, std::size_t j, std::size_t budget,
                    const ValidateOptions& options) {
  Validation v;
  v.budget = std::max(j, budget);
  auto init = enumerate(problem.init_automaton, options.max_threads, options.max_stack,
                        options.max_configs);
  v.initial_configs = init.size();
  const auto& target = problem.target_automaton;
  auto result = bounded_search_strict(
      problem.model, init, [&](const Configuration& c) { return target.accepts(c); },
      {v.budget, options.node_cap});
  v.explored = result.explored;
  v.exhausted = result.status == SearchResult::Status::BudgetExceeded;
  if (result.status == SearchResult::Status::Found) {
    v.real = true;
    v.trace = std::move(result.trace);
  }
  return v;
}

std::string to_string(Verdict::Outcome o) {
  switch (o) {
    case Verdict::Outcome::Unreachable:
      return "unreachable";
    case Verdict::Outcome::Reachable:
      return "reachable";
    case Verdict::Outcome::Unknown:
      break;
  }
  return "unknown";
}

Verdict run_cegar(const Problem& problem, const CegarOptions& options) {
  auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  std::vector<AbstractionKind> kinds;
  if (options.use_prefix) kinds.push_back(AbstractionKind::Prefix);
  if (options.use_suffix) kinds.push_back(AbstractionKind::Suffix);
  for (std::size_t n = 1; n <= options.max_order; ++n) {
    OrderRecord rec;
    rec.order = n;
    try {
      for (auto k : kinds) rec.checks.push_back(check_order(problem, KDomain(k, n), options.check));
    } catch (const ResourceLimit& e) {
      rec.error = e.what();
      v.history.push_back(std::move(rec));
      break;
    }
    const CheckResult* cex = nullptr;
    for (const auto& c : rec.checks) {
      if (c.proven) {
        v.outcome = Verdict::Outcome::Unreachable;
        v.order = n;
        v.kind = c.kind;
        v.history.push_back(std::move(rec));
        v.seconds = since(t0);
        return v;
      }
      if (!cex || *c.j < *cex->j) cex = &c;
    }
    if (cex) {
      rec.validation = validate(problem, *cex->j, options.budget.value_or(n), options.validation);
      if (rec.validation->real) {
        v.outcome = Verdict::Outcome::Reachable;
        v.order = n;
        v.kind = cex->kind;
        v.trace = rec.validation->trace;
        v.history.push_back(std::move(rec));
        v.seconds = since(t0);
        return v;
      }
    }
    v.history.push_back(std::move(rec));
  }
  v.outcome = Verdict::Outcome::Unknown;
  v.order = options.max_order;
  v.seconds = since(t0);
  return v;
}

nlohmann::json trace_to_json(const Sdpn& model, const Trace& trace) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : trace.steps) {
    nlohmann::json rules = nlohmann::json::array();
    for (auto r : s.rules) {
      const auto& rule = model.rules()[r];
      rules.push_back(rule.name.empty() ? "#" + std::to_string(r) : rule.name);
    }
    steps.push_back({{"action", model.format(s.action)},
                     {"rules", rules},
                     {"configuration", model.format(s.result)}});
  }
  return {{"start", model.format(trace.start)},
          {"length", trace.steps.size()},
          {"steps", steps}};
}

nlohmann::json check_to_json(const Sdpn& model, const CheckResult& r) {
  nlohmann::json paths = nlohmann::json::array();
  for (const auto& w : r.paths.words) paths.push_back(format_word(model, w));
  nlohmann::json j = {{"abstraction", to_string(r.kind)},
                      {"order", r.order},
                      {"proven", r.proven},
                      {"paths", paths},
                      {"statistics",
                       {{"apre_transitions", r.apre_transitions},
                        {"constraints", r.constraints},
                        {"label_variables", r.solver.variables},
                        {"table_updates", r.solver.updates},
                        {"table_words", r.solver.table_words}}}};
  j["counterexample_length"] = r.j ? nlohmann::json(*r.j) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json verdict_to_json(const Problem& problem, const CegarOptions& options,
                               const Verdict& v) {
  nlohmann::json history = nlohmann::json::array();
  nlohmann::json timing = {{"total_seconds", v.seconds}};
  nlohmann::json check_times = nlohmann::json::array();
  for (const auto& rec : v.history) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : rec.checks) {
      checks.push_back(check_to_json(problem.model, c));
      check_times.push_back({{"order", c.order}, {"abstraction", to_string(c.kind)},
                             {"seconds", c.seconds}});
    }
    nlohmann::json r = {{"order", rec.order}, {"checks", checks}};
    if (rec.validation) {
      const auto& val = *rec.validation;
      r["validation"] = {{"result", val.real ? "real" : "spurious"},
                         {"budget", val.budget},
                         {"explored", val.explored},
                         {"initial_configurations", val.initial_configs},
                         {"node_cap_hit", val.exhausted}};
    }
    if (rec.error) r["error"] = *rec.error;
    history.push_back(r);
  }
  timing["checks"] = check_times;
  nlohmann::json kinds = nlohmann::json::array();
  if (options.use_prefix) kinds.push_back("prefix");
  if (options.use_suffix) kinds.push_back("suffix");
  nlohmann::json out = {
      {"outcome", to_string(v.outcome)},
      {"order", v.order},
      {"configuration",
       {{"init", problem.init_text},
        {"target", problem.target_text},
        {"abstractions", kinds},
        {"max_order", options.max_order},
        {"budget", options.budget ? nlohmann::json(*options.budget) : nlohmann::json("order")},
        {"node_cap", options.validation.node_cap},
        {"variable_cap", options.check.variable_cap},
        {"max_threads", options.validation.max_threads},
        {"max_stack", options.validation.max_stack}}},
      {"history", history},
      {"timing", timing}};
  if (v.outcome == Verdict::Outcome::Unreachable) out["abstraction"] = to_string(v.kind);
  out["trace"] = v.trace ? trace_to_json(problem.model, *v.trace) : nlohmann::json(nullptr);
  return out;
}

}  // namespace sdpn
