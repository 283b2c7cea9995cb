#include "bridgeflow/report.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <limits>

namespace bridgeflow {

TransportReport make_transport_report(const RobustPlan& plan) {
  const std::size_t n = plan.graph.size();
  MinCostPaths mc = min_cost_paths(plan.energies, plan.source, plan.sink, plan.steps);
  OmtCoupling omt = omt_plan(mc.costs.cost, delta_distribution(n, plan.source), delta_distribution(n, plan.sink));
  std::optional<Comparison> cmp;
  if (plan.ensemble) cmp = compare(*plan.ensemble, mc, omt);
  const auto& gaps = plan.bridge.potentials.gap_history;
  return TransportReport{plan.source,
                         plan.sink,
                         plan.steps,
                         plan.prior,
                         plan.feasibility.path_weight,
                         plan.bridge.potentials.iterations,
                         gaps.empty() ? 0.0 : gaps.back(),
                         plan.bridge.schedule,
                         plan.bridge.flow,
                         plan.ensemble,
                         std::move(mc),
                         std::move(omt),
                         std::move(cmp)};
}

std::string format_fixed6(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

std::string format_path(const Path& p) {
  std::string s;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (k) s += '-';
    s += std::to_string(label_of(p[k]));
  }
  return s;
}

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (double v : m.row(i)) row.push_back(std::isfinite(v) ? Json(v) : Json(nullptr));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(std::isfinite(x) ? Json(x) : Json(nullptr));
  return out;
}

Json path_to_json(const Path& p) {
  Json out = Json::array();
  for (Node x : p) out.push_back(label_of(x));
  return out;
}

namespace {

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json ensemble_json(const PathEnsemble& e) {
  Json paths = Json::array();
  for (std::size_t k = 0; k < e.size(); ++k)
    paths.push_back(Json{{"nodes", path_to_json(e.paths[k])}, {"probability", e.probs[k]}, {"cost", finite_or_null(e.costs[k])}});
  return paths;
}

Json schedule_json(const TransitionSchedule& ts) {
  Json steps = Json::array();
  for (const Matrix& pi : ts.steps) steps.push_back(to_json(pi));
  return steps;
}

void write_vector_line(std::ostream& out, const std::string& name, const Vector& v) {
  out << name;
  for (double x : v) out << ' ' << std::setw(10) << format_fixed6(x);
  out << '\n';
}

}  // namespace

Json perron_json(const PerronData& p) {
  return Json{{"schema", "bridgeflow.perron"},
              {"version", kSchemaVersion},
              {"lambda", p.lambda},
              {"entropy_rate", std::log(p.lambda)},
              {"right", to_json(p.right)},
              {"left", to_json(p.left)},
              {"iterations", p.iterations}};
}

Json walk_json(const StationaryWalk& w) {
  return Json{{"schema", "bridgeflow.rb"},
              {"version", kSchemaVersion},
              {"lambda", w.lambda},
              {"kernel", to_json(w.kernel)},
              {"stationary", to_json(w.stationary)}};
}

Json bridge_json(const BridgeSolution& s) {
  const auto& gaps = s.potentials.gap_history;
  return Json{{"schema", "bridgeflow.bridge"},
              {"version", kSchemaVersion},
              {"steps", s.schedule.horizon()},
              {"iterations", s.potentials.iterations},
              {"final_gap", gaps.empty() ? 0.0 : gaps.back()},
              {"flow", to_json(s.flow.rows)},
              {"schedule", schedule_json(s.schedule)}};
}

Json transport_json(const TransportReport& r) {
  Json min_cost{{"cost", finite_or_null(r.min_cost.cost)}, {"paths", Json::array()}};
  for (const Path& p : r.min_cost.paths) min_cost["paths"].push_back(path_to_json(p));

  Json doc{{"schema", "bridgeflow.plan"},
           {"version", kSchemaVersion},
           {"source", label_of(r.source)},
           {"sink", label_of(r.sink)},
           {"steps", r.steps},
           {"prior", Json{{"mode", std::string(to_string(r.prior.mode))}, {"teleport_energy", r.prior.teleport_energy}}},
           {"path_weight", r.path_weight},
           {"iterations", r.iterations},
           {"final_gap", r.final_gap},
           {"flow", to_json(r.flow.rows)},
           {"schedule", schedule_json(r.schedule)},
           {"paths", r.ensemble ? ensemble_json(*r.ensemble) : Json(nullptr)},
           {"min_cost", std::move(min_cost)},
           {"omt", Json{{"total_cost", r.omt.total_cost}, {"coupling", to_json(r.omt.q)}}}};
  if (r.comparison) {
    const Comparison& c = *r.comparison;
    Json levels = Json::array();
    for (const CostLevel& l : c.levels)
      levels.push_back(Json{{"cost", l.cost},
                            {"paths", l.path_count},
                            {"min_probability", l.min_probability},
                            {"max_probability", l.max_probability},
                            {"total_probability", l.total_probability}});
    doc["comparison"] = Json{{"cost_levels", std::move(levels)},
                             {"probability_decreasing_in_cost", c.probability_decreasing_in_cost},
                             {"max_equal_cost_spread", c.max_equal_cost_spread},
                             {"boltzmann_residual", c.boltzmann_residual},
                             {"min_cost_mass", c.min_cost_mass},
                             {"bridge_paths", c.bridge_paths},
                             {"min_cost_paths", c.min_cost_path_count},
                             {"omt_paths", c.omt_paths},
                             {"effective_support", c.effective_support}};
  } else {
    doc["comparison"] = nullptr;
  }
  return doc;
}

Json omt_json(const CostMatrix& c, const OmtCoupling& omt, const std::optional<MinCostPaths>& pair) {
  Json doc{{"schema", "bridgeflow.omt"},
           {"version", kSchemaVersion},
           {"steps", c.steps},
           {"cost_matrix", to_json(c.cost)},
           {"coupling", to_json(omt.q)},
           {"total_cost", omt.total_cost},
           {"row_potential", to_json(omt.row_potential)},
           {"col_potential", to_json(omt.col_potential)},
           {"slackness_residual", omt.slackness_residual}};
  if (pair) {
    Json paths = Json::array();
    for (const Path& p : pair->paths) paths.push_back(path_to_json(p));
    doc["min_cost"] = Json{{"cost", finite_or_null(pair->cost)}, {"paths", std::move(paths)}};
  }
  return doc;
}

void write_matrix_table(std::ostream& out, const Matrix& m, const std::string& row_label, std::size_t first_row) {
  out << std::setw(4) << row_label;
  for (std::size_t j = 0; j < m.cols(); ++j) out << ' ' << std::setw(10) << (j + 1);
  out << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << std::setw(4) << (i + first_row);
    for (double v : m.row(i)) out << ' ' << std::setw(10) << format_fixed6(v);
    out << '\n';
  }
}

void write_flow_table(std::ostream& out, const MarginalFlow& flow) {
  out << "flow (row t = mass at time t, column = node)\n";
  write_matrix_table(out, flow.rows, "t");
}

void write_perron_text(std::ostream& out, const PerronData& p) {
  out << "lambda        " << std::setprecision(17) << p.lambda << '\n';
  out << "entropy rate  " << std::setprecision(17) << std::log(p.lambda) << '\n';
  out << "iterations    " << p.iterations << '\n';
  write_vector_line(out, "right", p.right);
  write_vector_line(out, "left ", p.left);
}

void write_walk_text(std::ostream& out, const StationaryWalk& w) {
  out << "lambda " << std::setprecision(17) << w.lambda << '\n';
  out << "transition kernel\n";
  write_matrix_table(out, w.kernel, "i", 1);
  write_vector_line(out, "stationary", w.stationary);
}

void write_bridge_text(std::ostream& out, const BridgeSolution& s) {
  out << "steps " << s.schedule.horizon() << ", iterations " << s.potentials.iterations << '\n';
  write_flow_table(out, s.flow);
}

void write_transport_text(std::ostream& out, const TransportReport& r) {
  out << "robust plan " << label_of(r.source) << " -> " << label_of(r.sink) << " in " << r.steps << " steps\n";
  out << "(M^N)_{source,sink} = " << std::setprecision(12) << r.path_weight << '\n';
  write_flow_table(out, r.flow);
  if (r.ensemble) {
    out << "\npaths: " << r.ensemble->size() << '\n';
    out << std::setw(12) << "probability" << std::setw(12) << "cost" << "  path\n";
    for (std::size_t k = 0; k < r.ensemble->size(); ++k)
      out << std::setw(12) << format_fixed6(r.ensemble->probs[k]) << std::setw(12) << format_fixed6(r.ensemble->costs[k])
          << "  " << format_path(r.ensemble->paths[k]) << '\n';
  }
  out << "\nminimum cost " << format_fixed6(r.min_cost.cost) << " via";
  for (const Path& p : r.min_cost.paths) out << ' ' << format_path(p);
  out << '\n';
  if (r.comparison) {
    const Comparison& c = *r.comparison;
    out << "bridge mass on minimum-cost paths  " << format_fixed6(c.min_cost_mass) << '\n';
    out << "paths used: bridge " << c.bridge_paths << ", OMT " << c.omt_paths << '\n';
    out << "effective support exp(H)           " << format_fixed6(c.effective_support) << '\n';
    out << "probability decreasing in cost     " << (c.probability_decreasing_in_cost ? "yes" : "no") << '\n';
  }
}

void write_omt_text(std::ostream& out, const CostMatrix& c, const OmtCoupling& omt, const std::optional<MinCostPaths>& pair) {
  out << "end-to-end cost over <= " << c.steps << " steps\n";
  write_matrix_table(out, c.cost, "i", 1);
  out << "\ncoupling\n";
  write_matrix_table(out, omt.q, "i", 1);
  out << "\ntotal cost " << format_fixed6(omt.total_cost) << '\n';
  if (pair) {
    out << "minimum cost paths:";
    for (const Path& p : pair->paths) out << ' ' << format_path(p);
    out << '\n';
  }
}

}  // namespace bridgeflow
