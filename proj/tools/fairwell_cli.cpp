// Command line driver: loads a JSON instance file, runs the requested
// computation, and prints a JSON report to stdout. Exit codes: 0 success,
// 2 schema problem, 3 domain problem, 4 non-convergence (report still
// printed). stderr carries human-readable messages only.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fairwell/serialization.hpp"

namespace fw = fairwell;
using fw::Json;

namespace {

std::string load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw fw::schema_error(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string line_anchor(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

struct Options {
  std::uint64_t seed = 0;
  double tol = 1e-6;
  int indent = 2;
  bool no_timing = false;

  bool grad = false;
  std::string direction = "min";
  std::string trace_path;
  bool verify_equilibrium = false;
  double grid = 1e-2;
};

Json run_eval(const Json& body, const Options& opt) {
  fw::ser::reject_unknown(body, {"aggregator", "sentiments"}, "aggregate");
  const fw::Aggregator agg =
      fw::ser::read_aggregator(fw::ser::require_field(body, "aggregator", "aggregate"),
                               "aggregate");
  const fw::SentimentVector s =
      fw::ser::read_sentiments(fw::ser::require_field(body, "sentiments", "aggregate"),
                               "aggregate");
  Json result{{"value", fw::aggregate(agg, s)}};
  if (opt.grad) result["gradient"] = fw::gradient(agg, s);
  return result;
}

Json run_adversary(const Json& body, const Options& opt) {
  fw::ser::reject_unknown(body, {"weight_set", "sentiments"}, "adversary");
  const fw::WeightSet W =
      fw::ser::read_weight_set(fw::ser::require_field(body, "weight_set", "adversary"),
                               "adversary");
  const fw::SentimentVector s =
      fw::ser::read_sentiments(fw::ser::require_field(body, "sentiments", "adversary"),
                               "adversary");
  const fw::Direction dir =
      opt.direction == "max" ? fw::Direction::Maximize : fw::Direction::Minimize;
  const fw::BestResponse br = fw::best_response(W, s, dir);
  return Json{{"direction", opt.direction},
              {"weights", br.w},
              {"value", br.value},
              {"exact", br.exact}};
}

void write_trace(const std::string& path, const std::vector<fw::TracePoint>& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw fw::schema_error(path + ": cannot write trace file");
  out << "iter,value,gap,step\n";
  for (const auto& pt : trace) {
    out << pt.iter << "," << Json(pt.value).dump() << "," << Json(pt.gap).dump() << ","
        << Json(pt.step).dump() << "\n";
  }
}

Json run_solve(const Json& body, const Options& opt, Json& diagnostics, int& exit_code) {
  fw::ser::reject_unknown(body, {"instance", "objective"}, "allocation");
  const fw::AllocationInstance inst =
      fw::ser::read_allocation(fw::ser::require_field(body, "instance", "allocation"),
                               "allocation");
  const fw::Objective obj =
      fw::ser::read_objective(fw::ser::require_field(body, "objective", "allocation"),
                              "allocation");
  fw::SolveConfig cfg;
  cfg.seed = opt.seed;
  cfg.tolerance = opt.tol;
  cfg.record_trace = !opt.trace_path.empty();
  const fw::SolveReport rep = fw::solve_allocation(inst, obj, cfg);
  if (!opt.trace_path.empty()) write_trace(opt.trace_path, rep.trace);

  const fw::Mat theta = fw::detail::unflatten(rep.theta, inst.g, inst.k);
  const fw::SentimentVector u = fw::utilities(inst, {theta});
  diagnostics["iterations"] = rep.iterations;
  diagnostics["gap"] = rep.gap_estimate;
  if (!rep.converged) exit_code = 4;
  return Json{{"value", rep.value},
              {"theta", theta},
              {"utilities", u.values},
              {"adversary", rep.adversary},
              {"converged", rep.converged}};
}

Json run_game(const Json& body, const Options& opt) {
  fw::ser::reject_unknown(body, {"game", "profile"}, "game");
  const fw::GameSpec G =
      fw::ser::read_game(fw::ser::require_field(body, "game", "game"), "game");

  if (opt.verify_equilibrium) {
    if (!body.contains("profile"))
      throw fw::schema_error("game: --verify-equilibrium needs a profile");
    const fw::StrategyProfile profile =
        fw::ser::read_profile(body.at("profile"), G.sense, "game");
    const fw::EquilibriumReport rep =
        fw::verify_equilibrium(G, profile, opt.grid, opt.tol);
    return Json{{"equilibrium", rep.equilibrium},
                {"daemon_improvement", rep.daemon_improvement},
                {"angel_gap", rep.angel_gap}};
  }

  std::optional<fw::SolveConfig> cfg;
  if (std::holds_alternative<fw::AllocationInstance>(G.daemon_space)) {
    cfg.emplace();
    cfg->seed = opt.seed;
    cfg->tolerance = opt.tol;
  }
  const fw::StrategicValue sv = fw::daemon_strategic_value(G, cfg);
  Json result{{"choice", sv.choice},
              {"action", sv.action.values},
              {"value", sv.value},
              {"angel", Json{{"weights", sv.angel.w},
                             {"value", sv.angel.value},
                             {"exact", sv.angel.exact}}}};
  if (const auto* inst = std::get_if<fw::AllocationInstance>(&G.daemon_space))
    result["theta"] = fw::detail::unflatten(sv.theta, inst->g, inst->k);
  if (const auto* alt = std::get_if<fw::AltruisticAngel>(&G.payoff))
    result["angel_strategy"] =
        fw::altruistic_angel_strategy(alt->p, alt->w_star, sv.action.values, alt->s_min);
  return result;
}

Json run_bounds(const Json& body, const Options& opt) {
  const std::string op =
      fw::ser::read_string(fw::ser::require_field(body, "op", "bounds"), "bounds");
  if (op == "sandwich") {
    fw::ser::reject_unknown(body, {"op", "sentiments", "aggregator", "weight_set"}, "bounds");
    const auto iv = fw::sandwich(
        fw::ser::read_sentiments(fw::ser::require_field(body, "sentiments", "bounds"),
                                 "bounds"),
        fw::ser::read_aggregator(fw::ser::require_field(body, "aggregator", "bounds"),
                                 "bounds"),
        fw::ser::read_weight_set(fw::ser::require_field(body, "weight_set", "bounds"),
                                 "bounds"));
    return Json{{"lo", iv.lo}, {"hi", iv.hi}};
  }
  if (op == "gap_bound") {
    fw::ser::reject_unknown(body, {"op", "range", "weight_set"}, "bounds");
    const double bound = fw::robust_gap_bound(
        fw::ser::read_number(fw::ser::require_field(body, "range", "bounds"), "bounds"),
        fw::ser::read_weight_set(fw::ser::require_field(body, "weight_set", "bounds"),
                                 "bounds"));
    return Json{{"bound", bound}};
  }
  if (op == "holder_certificate") {
    fw::ser::reject_unknown(body, {"op", "p", "weight_set", "range"}, "bounds");
    const fw::HolderReport rep = fw::holder_certificate(
        fw::ser::read_power(fw::ser::require_field(body, "p", "bounds"), "bounds"),
        fw::ser::read_weight_set(fw::ser::require_field(body, "weight_set", "bounds"),
                                 "bounds"),
        fw::ser::read_number(fw::ser::require_field(body, "range", "bounds"), "bounds"));
    Json applicable = Json::array();
    for (const auto& cert : rep.applicable)
      applicable.push_back(fw::ser::write_certificate(cert));
    return Json{{"best", fw::ser::write_certificate(rep.best)}, {"applicable", applicable}};
  }
  if (op == "holder_check") {
    fw::ser::reject_unknown(
        body, {"op", "aggregator", "weight_set", "certificate", "trials", "range"}, "bounds");
    const auto chk = fw::holder_empirical_check(
        fw::ser::read_aggregator(fw::ser::require_field(body, "aggregator", "bounds"),
                                 "bounds"),
        fw::ser::read_weight_set(fw::ser::require_field(body, "weight_set", "bounds"),
                                 "bounds"),
        fw::ser::read_certificate(fw::ser::require_field(body, "certificate", "bounds"),
                                  "bounds"),
        static_cast<int>(
            fw::ser::read_count(fw::ser::require_field(body, "trials", "bounds"), "bounds")),
        fw::ser::read_number(fw::ser::require_field(body, "range", "bounds"), "bounds"),
        opt.seed);
    return Json{{"passed", chk.passed}, {"max_ratio", chk.max_ratio}};
  }
  if (op == "generalization") {
    fw::ser::reject_unknown(body, {"op", "sentiments", "eps", "objective"}, "bounds");
    const auto iv = fw::generalization_sandwich(
        fw::ser::read_sentiments(fw::ser::require_field(body, "sentiments", "bounds"),
                                 "bounds"),
        fw::ser::read_vec(fw::ser::require_field(body, "eps", "bounds"), "bounds"),
        fw::ser::read_objective(fw::ser::require_field(body, "objective", "bounds"),
                                "bounds"));
    return Json{{"lo", iv.lo}, {"hi", iv.hi}};
  }
  throw fw::schema_error("bounds: unknown op '" + op + "'");
}

Json run_samples(const Json& body) {
  const fw::SampleComplexityQuery q = fw::ser::read_sample_query(body, "sample_complexity");
  return Json{{"samples", fw::sample_complexity(q)}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robust fair welfare objectives: evaluate, solve, and certify"};
  app.require_subcommand(1);
  app.fallthrough();

  Options opt;
  app.add_option("--seed", opt.seed, "random seed for solver and checks");
  app.add_option("--tol", opt.tol, "solver and verification tolerance");
  app.add_option("--json-indent", opt.indent, "report indentation");
  app.add_flag("--no-timing", opt.no_timing, "omit the timing field");

  std::string path;
  auto* eval = app.add_subcommand("eval", "evaluate an aggregate instance");
  eval->add_option("file", path, "instance file")->required();
  eval->add_flag("--grad", opt.grad, "include the gradient in the result");

  auto* adversary = app.add_subcommand("adversary", "best-response weights over a weight set");
  adversary->add_option("file", path, "instance file")->required();
  adversary->add_option("--direction", opt.direction, "min or max")
      ->check(CLI::IsMember({"min", "max"}));

  auto* solve = app.add_subcommand("solve", "solve an allocation instance");
  solve->add_option("file", path, "instance file")->required();
  solve->add_option("--trace", opt.trace_path, "write the iteration trace CSV here");

  auto* game = app.add_subcommand("game", "strategic value or equilibrium check");
  game->add_option("file", path, "instance file")->required();
  game->add_flag("--verify-equilibrium", opt.verify_equilibrium,
                 "check the profile in the instance file");
  game->add_option("--grid", opt.grid, "deviation search resolution");

  auto* bounds = app.add_subcommand("bounds", "interval and continuity calculators");
  bounds->add_option("file", path, "instance file")->required();

  auto* samples = app.add_subcommand("samples", "sample-complexity bound");
  samples->add_option("file", path, "instance file")->required();

  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  const std::string expected_kind = command == "eval"        ? "aggregate"
                                    : command == "adversary" ? "adversary"
                                    : command == "solve"     ? "allocation"
                                    : command == "samples"   ? "sample_complexity"
                                                             : command;

  const auto started = std::chrono::steady_clock::now();
  int exit_code = 0;
  try {
    const std::string bytes = load_file(path);
    Json root;
    try {
      root = Json::parse(bytes);
    } catch (const Json::parse_error& e) {
      throw fw::schema_error(path + ":" + line_anchor(bytes, e.byte) + ": " + e.what());
    }
    const fw::InstanceFile inst = fw::parse_instance(root);
    if (inst.kind != expected_kind)
      throw fw::schema_error(path + ": kind '" + inst.kind + "' does not match command '" +
                             command + "'");

    Json diagnostics{{"iterations", 0}, {"gap", 0.0}, {"seed", opt.seed}};
    Json result;
    if (command == "eval") {
      result = run_eval(inst.body, opt);
    } else if (command == "adversary") {
      result = run_adversary(inst.body, opt);
    } else if (command == "solve") {
      result = run_solve(inst.body, opt, diagnostics, exit_code);
    } else if (command == "game") {
      result = run_game(inst.body, opt);
    } else if (command == "bounds") {
      result = run_bounds(inst.body, opt);
    } else {
      result = run_samples(inst.body);
    }

    Json report;
    report["version"] = "1";
    report["echoedInput"] = fw::fnv1a_digest(bytes);
    report["result"] = result;
    report["diagnostics"] = diagnostics;
    if (!opt.no_timing) {
      const auto elapsed = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - started)
                               .count();
      report["timing"] = Json{{"milliseconds", elapsed}};
    }
    std::cout << report.dump(opt.indent) << "\n";
    if (exit_code != 0)
      std::cerr << "fairwell: solver did not converge (report printed)\n";
    return exit_code;
  } catch (const fw::schema_error& e) {
    std::cerr << "fairwell: " << e.what() << "\n";
    return 2;
  } catch (const fw::convergence_error& e) {
    std::cerr << "fairwell: " << e.what() << "\n";
    return 4;
  } catch (const fw::domain_error& e) {
    std::cerr << "fairwell: " << e.what() << "\n";
    return 3;
  }
}
