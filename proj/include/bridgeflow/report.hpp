#pragma once

// JSON and text renderings of solver results. JSON carries full double
// precision; text tables round to 6 decimals (round-half-even on the exact
// binary value). Labels are 1-based throughout.

#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "bridgeflow/bridge.hpp"
#include "bridgeflow/spectral.hpp"
#include "bridgeflow/transport.hpp"

namespace bridgeflow {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "1";

struct TransportReport {
  Node source;
  Node sink;
  std::size_t steps;
  PriorSpec prior;
  double path_weight;
  std::size_t iterations;
  double final_gap;
  TransitionSchedule schedule;
  MarginalFlow flow;
  std::optional<PathEnsemble> ensemble;
  MinCostPaths min_cost;
  OmtCoupling omt;
  std::optional<Comparison> comparison;
};

TransportReport make_transport_report(const RobustPlan& plan);

std::string format_fixed6(double v);
std::string format_path(const Path& p);

Json to_json(const Matrix& m);
Json to_json(const Vector& v);
Json path_to_json(const Path& p);

Json perron_json(const PerronData& p);
Json walk_json(const StationaryWalk& w);
Json bridge_json(const BridgeSolution& s);
Json transport_json(const TransportReport& r);
// `pair` carries the minimizing paths when both marginals are deltas.
Json omt_json(const CostMatrix& c, const OmtCoupling& omt, const std::optional<MinCostPaths>& pair);

void write_flow_table(std::ostream& out, const MarginalFlow& flow);
void write_matrix_table(std::ostream& out, const Matrix& m, const std::string& row_label, std::size_t first_row = 0);
void write_perron_text(std::ostream& out, const PerronData& p);
void write_walk_text(std::ostream& out, const StationaryWalk& w);
void write_bridge_text(std::ostream& out, const BridgeSolution& s);
void write_transport_text(std::ostream& out, const TransportReport& r);
void write_omt_text(std::ostream& out, const CostMatrix& c, const OmtCoupling& omt, const std::optional<MinCostPaths>& pair);

}  // namespace bridgeflow
