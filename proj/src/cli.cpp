#include "bridgeflow/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>

#include "bridgeflow/errors.hpp"
#include "bridgeflow/report.hpp"
#include "bridgeflow/spectral.hpp"

namespace bridgeflow::cli {

Distribution read_marginal_file(const std::string& path, std::size_t n) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open marginal file '" + path + "'");
  Distribution d;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    double v = 0.0;
    if (!(fields >> v)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw ParseError(line_no, "expected a number in '" + path + "'");
    }
    std::string extra;
    if (fields >> extra) throw ParseError(line_no, "one weight per line expected in '" + path + "'");
    if (!std::isfinite(v) || v < 0.0) throw ValidationError("line " + std::to_string(line_no) + ": weights must be finite and >= 0");
    d.push_back(v);
  }
  if (d.size() != n)
    throw ValidationError("'" + path + "' has " + std::to_string(d.size()) + " weights, the graph has " + std::to_string(n) + " nodes");
  const double sum = std::accumulate(d.begin(), d.end(), 0.0);
  if (!(sum > 0.0)) throw ValidationError("'" + path + "' carries no mass");
  for (double& v : d) v /= sum;
  return d;
}

namespace {

PriorSpec prior_for(const RunConfig& c, const Graph& g) {
  PriorSpec spec;
  spec.mode = c.prior_mode.value_or(g.has_costs() ? PriorMode::weighted : PriorMode::adjacency);
  spec.teleport_energy = c.teleport_energy;
  return spec;
}

Node required_node(const std::optional<long long>& label, const char* flag, std::size_t n) {
  if (!label) throw ValidationError(std::string(flag) + " is required for this command");
  return node_from_label(*label, n);
}

std::size_t required_steps(const RunConfig& c) {
  if (c.steps == 0) throw ValidationError("--steps N (N >= 1) is required for this command");
  return c.steps;
}

Distribution marginal(const std::optional<std::string>& path, const std::optional<long long>& delta,
                      const std::optional<long long>& fallback, const char* name, std::size_t n) {
  if (path && delta) throw ValidationError(std::string("give either a file or a delta for ") + name + ", not both");
  if (path) return read_marginal_file(*path, n);
  if (delta) return delta_distribution(n, node_from_label(*delta, n));
  if (fallback) return delta_distribution(n, node_from_label(*fallback, n));
  throw ValidationError(std::string(name) + " is required: pass a file or a delta node");
}

void emit(const RunConfig& c, std::ostream& out, const Json& doc, const std::string& text) {
  std::ofstream file;
  std::ostream* sink = &out;
  if (c.output_path) {
    file.open(*c.output_path, std::ios::binary);
    if (!file) throw ValidationError("cannot write '" + *c.output_path + "'");
    sink = &file;
  }
  if (c.output_format == OutputFormat::json)
    *sink << doc.dump(2) << '\n';
  else
    *sink << text;
}

int verify(const RunConfig& c, const Graph& g, std::ostream& out) {
  PlanOptions options;
  options.prior = prior_for(c, g);
  options.add_sink_loop = c.add_sink_loop;
  options.solve = {c.tol, c.max_iter};
  const Node source = required_node(c.source, "--source", g.size());
  const Node sink = required_node(c.sink, "--sink", g.size());
  const RobustPlan plan = robust_plan(g, source, sink, required_steps(c), options);
  if (!plan.ensemble) throw CapacityError("too many feasible paths to enumerate");
  const PathEnsemble oracle = oracle_bridge(plan.kernel, source, sink, plan.steps, &plan.energies);

  std::map<Path, double> solver_probs;
  for (std::size_t k = 0; k < plan.ensemble->size(); ++k) solver_probs[plan.ensemble->paths[k]] = plan.ensemble->probs[k];
  std::map<Path, double> oracle_probs;
  for (std::size_t k = 0; k < oracle.size(); ++k) oracle_probs[oracle.paths[k]] = oracle.probs[k];

  double worst = 0.0;
  for (const auto& [path, p] : oracle_probs) {
    const auto it = solver_probs.find(path);
    worst = std::max(worst, std::abs(p - (it == solver_probs.end() ? 0.0 : it->second)));
  }
  for (const auto& [path, p] : solver_probs)
    if (!oracle_probs.count(path)) worst = std::max(worst, p);

  const bool passed = worst <= kVerifyTolerance;
  Json doc{{"schema", "bridgeflow.verify"},
           {"version", kSchemaVersion},
           {"source", label_of(source)},
           {"sink", label_of(sink)},
           {"steps", plan.steps},
           {"prior", std::string(to_string(options.prior.mode))},
           {"paths_solver", plan.ensemble->size()},
           {"paths_oracle", oracle.size()},
           {"max_discrepancy", worst},
           {"tolerance", kVerifyTolerance},
           {"passed", passed}};
  std::ostringstream text;
  text << "paths (solver/oracle)  " << plan.ensemble->size() << " / " << oracle.size() << '\n'
       << "max discrepancy        " << std::scientific << std::setprecision(3) << worst << '\n'
       << (passed ? "PASS" : "FAIL") << " (tolerance " << kVerifyTolerance << ")\n";
  emit(c, out, doc, text.str());
  return passed ? exit_code::ok : exit_code::verification_failed;
}

int dispatch(const RunConfig& c, std::ostream& out) {
  if (c.graph_path.empty()) throw ValidationError("--graph is required");
  const Graph g = read_graph_file(c.graph_path);
  const std::size_t n = g.size();
  const PriorSpec spec = prior_for(c, g);
  const SolveOptions solve{c.tol, c.max_iter};

  switch (c.command) {
    case Command::perron: {
      const PerronData p = perron(prior_kernel(g, spec));
      std::ostringstream text;
      write_perron_text(text, p);
      emit(c, out, perron_json(p), text.str());
      return exit_code::ok;
    }
    case Command::rb: {
      const StationaryWalk w = rb_walk(prior_kernel(g, spec));
      std::ostringstream text;
      write_walk_text(text, w);
      emit(c, out, walk_json(w), text.str());
      return exit_code::ok;
    }
    case Command::bridge: {
      BridgeProblem problem{prior_kernel(g, spec), required_steps(c),
                            marginal(c.nu0_path, c.nu0_delta, c.source, "nu0", n),
                            marginal(c.nuN_path, c.nuN_delta, c.sink, "nuN", n)};
      if (c.mu0_path) problem.mu0 = read_marginal_file(*c.mu0_path, n);
      const BridgeSolution s = solve_and_schedule(problem, solve);
      std::ostringstream text;
      write_bridge_text(text, s);
      emit(c, out, bridge_json(s), text.str());
      return exit_code::ok;
    }
    case Command::plan: {
      PlanOptions options;
      options.prior = spec;
      options.add_sink_loop = c.add_sink_loop;
      options.solve = solve;
      const RobustPlan plan = robust_plan(g, required_node(c.source, "--source", n), required_node(c.sink, "--sink", n),
                                          required_steps(c), options);
      const TransportReport report = make_transport_report(plan);
      std::ostringstream text;
      write_transport_text(text, report);
      emit(c, out, transport_json(report), text.str());
      return exit_code::ok;
    }
    case Command::omt: {
      const std::size_t steps = required_steps(c);
      const Matrix energies = prior_energies(g, spec);
      const Distribution nu0 = marginal(c.nu0_path, c.nu0_delta, c.source, "nu0", n);
      const Distribution nuN = marginal(c.nuN_path, c.nuN_delta, c.sink, "nuN", n);
      std::optional<MinCostPaths> pair;
      CostMatrix costs;
      if (c.source && c.sink && !c.nu0_path && !c.nuN_path && !c.nu0_delta && !c.nuN_delta) {
        pair = min_cost_paths(energies, node_from_label(*c.source, n), node_from_label(*c.sink, n), steps);
        costs = pair->costs;
      } else {
        costs = cost_matrix(energies, steps);
      }
      const OmtCoupling omt = omt_plan(costs.cost, nu0, nuN);
      std::ostringstream text;
      write_omt_text(text, costs, omt, pair);
      emit(c, out, omt_json(costs, omt, pair), text.str());
      return exit_code::ok;
    }
    case Command::verify:
      return verify(c, g, out);
  }
  return exit_code::usage;
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(config, out);
  } catch (const FeasibilityError& e) {
    err << "infeasible: " << e.what() << '\n';
    return exit_code::infeasible;
  } catch (const ConvergenceError& e) {
    err << "not converged: " << e.what() << '\n';
    return exit_code::not_converged;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::usage;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust transport plans on directed graphs via Schrodinger bridges"};
  app.require_subcommand(1);
  RunConfig config;
  std::string prior_name;
  std::string format_name = "text";
  std::string output_path;

  const std::map<std::string, OutputFormat> formats{{"text", OutputFormat::text}, {"json", OutputFormat::json}};

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-g,--graph", config.graph_path, "Graph file (edge list or JSON)")->required();
    sub->add_option("--prior", prior_name, "Prior kernel: adjacency|weighted|teleport")
        ->check(CLI::IsMember({"adjacency", "weighted", "teleport"}));
    sub->add_option("--teleport-energy", config.teleport_energy, "Energy U0 of non-edges in teleport mode")
        ->check(CLI::PositiveNumber);
    sub->add_option("--format", format_name, "Output format")->check(CLI::IsMember({"text", "json"}));
    sub->add_option("-o,--output", output_path, "Write the report to this file");
  };
  auto add_solver = [&](CLI::App* sub) {
    sub->add_option("--tol", config.tol, "Hilbert-gap tolerance")->envname("BRIDGEFLOW_TOL")->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", config.max_iter, "Iteration cap")->envname("BRIDGEFLOW_MAX_ITER")->check(CLI::PositiveNumber);
  };
  auto add_endpoints = [&](CLI::App* sub) {
    sub->add_option("--source", config.source, "Source node (1-based)");
    sub->add_option("--sink", config.sink, "Sink node (1-based)");
    sub->add_option("--steps", config.steps, "Number of steps N")->check(CLI::PositiveNumber);
  };
  auto add_marginals = [&](CLI::App* sub) {
    sub->add_option("--nu0", config.nu0_path, "Initial marginal file (one weight per line)");
    sub->add_option("--nu0-delta", config.nu0_delta, "Initial marginal concentrated on this node");
    sub->add_option("--nuN", config.nuN_path, "Final marginal file");
    sub->add_option("--nuN-delta", config.nuN_delta, "Final marginal concentrated on this node");
  };

  std::map<CLI::App*, Command> commands;
  auto* perron_cmd = app.add_subcommand("perron", "Spectral radius, Perron vectors and entropy rate");
  add_common(perron_cmd);
  commands[perron_cmd] = Command::perron;

  auto* rb_cmd = app.add_subcommand("rb", "Maximal-entropy (Ruelle-Bowen) walk and its stationary measure");
  add_common(rb_cmd);
  commands[rb_cmd] = Command::rb;

  auto* bridge_cmd = app.add_subcommand("bridge", "Schrodinger bridge between two marginals");
  add_common(bridge_cmd);
  add_solver(bridge_cmd);
  add_endpoints(bridge_cmd);
  add_marginals(bridge_cmd);
  bridge_cmd->add_option("--mu0", config.mu0_path, "Initial weights of the prior (default uniform)");
  commands[bridge_cmd] = Command::bridge;

  auto* plan_cmd = app.add_subcommand("plan", "Robust source-to-sink transport plan");
  add_common(plan_cmd);
  add_solver(plan_cmd);
  add_endpoints(plan_cmd);
  bool no_sink_loop = false;
  plan_cmd->add_flag("--no-sink-loop", no_sink_loop, "Do not add a self-loop at the sink");
  commands[plan_cmd] = Command::plan;

  auto* omt_cmd = app.add_subcommand("omt", "Minimal end-to-end costs and the optimal mass transport coupling");
  add_common(omt_cmd);
  add_endpoints(omt_cmd);
  add_marginals(omt_cmd);
  commands[omt_cmd] = Command::omt;

  auto* verify_cmd = app.add_subcommand("verify", "Compare the plan with brute-force path enumeration");
  add_common(verify_cmd);
  add_solver(verify_cmd);
  add_endpoints(verify_cmd);
  verify_cmd->add_flag("--no-sink-loop", no_sink_loop, "Do not add a self-loop at the sink");
  commands[verify_cmd] = Command::verify;

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_code::ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_code::ok;
  } catch (const CLI::ParseError& e) {
    // CallForHelp on a subcommand surfaces here as well.
    if (e.get_exit_code() == 0) {
      for (const auto& [sub, cmd] : commands)
        if (sub->parsed()) out << sub->help();
      return exit_code::ok;
    }
    err << "error: " << e.what() << '\n';
    return exit_code::usage;
  }

  for (const auto& [sub, cmd] : commands)
    if (sub->parsed()) config.command = cmd;
  if (!prior_name.empty()) config.prior_mode = parse_prior_mode(prior_name);
  config.output_format = formats.at(format_name);
  if (!output_path.empty()) config.output_path = output_path;
  config.add_sink_loop = !no_sink_loop;
  return run(config, out, err);
}

}  // namespace bridgeflow::cli
