#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>

#include "bridgeflow/bridge.hpp"
#include "bridgeflow/transport.hpp"

namespace bridgeflow::cli {

enum class Command { perron, rb, bridge, plan, omt, verify };
enum class OutputFormat { text, json };

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 1;  // bad flags, unreadable or malformed input
inline constexpr int infeasible = 2;
inline constexpr int not_converged = 3;
inline constexpr int verification_failed = 4;
}  // namespace exit_code

// Node labels are 1-based, as on the command line.
struct RunConfig {
  Command command = Command::plan;
  std::string graph_path;
  std::optional<long long> source;
  std::optional<long long> sink;
  std::size_t steps = 0;
  std::optional<PriorMode> prior_mode;  // unset: weighted if the graph has values, else adjacency
  double teleport_energy = 8.0;
  double tol = 1e-12;
  std::size_t max_iter = 10000;
  OutputFormat output_format = OutputFormat::text;
  std::optional<std::string> output_path;
  std::optional<std::string> nu0_path;
  std::optional<long long> nu0_delta;
  std::optional<std::string> nuN_path;
  std::optional<long long> nuN_delta;
  std::optional<std::string> mu0_path;
  bool add_sink_loop = true;
};

inline constexpr double kVerifyTolerance = 1e-9;

// One weight per line ('#' comments allowed), normalized to sum 1.
Distribution read_marginal_file(const std::string& path, std::size_t n);

int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// Parses argv (CLI11) and dispatches to run(). BRIDGEFLOW_TOL and
// BRIDGEFLOW_MAX_ITER supply defaults that explicit flags override.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bridgeflow::cli
