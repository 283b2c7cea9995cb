#include "bridgeflow/graph.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

#include <json.hpp>

#include "bridgeflow/errors.hpp"

namespace bridgeflow {

namespace {

std::string edge_text(const Edge& e) {
  return "(" + std::to_string(label_of(e.from)) + "," + std::to_string(label_of(e.to)) + ")";
}

}  // namespace

Graph::Graph(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
  sort_and_validate();
}

Graph Graph::with_energies(std::size_t n, std::vector<Edge> edges, std::vector<double> energies) {
  if (energies.size() != edges.size()) throw ValidationError("energy count does not match edge count");
  for (double u : energies)
    if (!std::isfinite(u) || u < 0.0) throw ValidationError("edge energies must be finite and >= 0");
  Graph g;
  g.n_ = n;
  g.edges_ = std::move(edges);
  g.energies_ = std::move(energies);
  g.weights_.resize(g.energies_.size());
  std::transform(g.energies_.begin(), g.energies_.end(), g.weights_.begin(),
                 [](double u) { return std::exp(-u); });
  g.weighted_ = true;
  g.sort_and_validate();
  return g;
}

Graph Graph::with_weights(std::size_t n, std::vector<Edge> edges, std::vector<double> weights) {
  if (weights.size() != edges.size()) throw ValidationError("weight count does not match edge count");
  for (double w : weights) {
    if (!(w > 0.0)) throw ValidationError("edge weights must be positive");
    if (!(w <= 1.0)) throw ValidationError("edge weights must be <= 1 (energies -log w must be >= 0)");
  }
  Graph g;
  g.n_ = n;
  g.edges_ = std::move(edges);
  g.weights_ = std::move(weights);
  g.energies_.resize(g.weights_.size());
  // -log(1) must be exactly 0 so unit-weight edges stay cost-free.
  std::transform(g.weights_.begin(), g.weights_.end(), g.energies_.begin(),
                 [](double w) { return w == 1.0 ? 0.0 : -std::log(w); });
  g.weighted_ = true;
  g.sort_and_validate();
  return g;
}

void Graph::sort_and_validate() {
  if (n_ == 0) throw ValidationError("graph must have at least one node");
  for (const Edge& e : edges_)
    if (e.from >= n_ || e.to >= n_) throw ValidationError("edge " + edge_text(e) + " has an endpoint outside 1.." + std::to_string(n_));

  std::vector<std::size_t> order(edges_.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return edges_[a] < edges_[b]; });
  auto permute = [&](auto& v) {
    if (v.empty()) return;
    auto copy = v;
    for (std::size_t k = 0; k < order.size(); ++k) v[k] = copy[order[k]];
  };
  permute(edges_);
  permute(energies_);
  permute(weights_);

  for (std::size_t k = 1; k < edges_.size(); ++k)
    if (edges_[k] == edges_[k - 1]) throw ValidationError("duplicate edge " + edge_text(edges_[k]));
}

bool Graph::has_edge(Node from, Node to) const {
  return std::binary_search(edges_.begin(), edges_.end(), Edge{from, to});
}

Graph Graph::with_edge(Node from, Node to) const {
  if (has_edge(from, to)) return *this;
  Graph g = *this;
  g.edges_.push_back({from, to});
  if (weighted_) {
    g.energies_.push_back(0.0);
    g.weights_.push_back(1.0);
  }
  g.sort_and_validate();
  return g;
}

Graph Graph::without_edge(Node from, Node to) const {
  Graph g = *this;
  auto it = std::lower_bound(g.edges_.begin(), g.edges_.end(), Edge{from, to});
  if (it == g.edges_.end() || *it != Edge{from, to}) return g;
  const auto k = static_cast<std::ptrdiff_t>(it - g.edges_.begin());
  g.edges_.erase(it);
  if (weighted_) {
    g.energies_.erase(g.energies_.begin() + k);
    g.weights_.erase(g.weights_.begin() + k);
  }
  return g;
}

Node node_from_label(long long label, std::size_t n) {
  if (label < 1 || static_cast<unsigned long long>(label) > n)
    throw ValidationError("node " + std::to_string(label) + " is outside 1.." + std::to_string(n));
  return static_cast<Node>(label - 1);
}

// ---------------------------------------------------------------------------
// Edge-list and JSON documents

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_integer(std::string_view tok, long long& out) {
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

bool parse_real(std::string_view tok, double& out) {
  // from_chars for double needs GCC 11+, which is the floor we build with.
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

ValueMode parse_mode(std::string_view v, std::size_t line) {
  if (v == "weight") return ValueMode::weight;
  if (v == "energy") return ValueMode::energy;
  throw ParseError(line, "mode must be 'weight' or 'energy', got '" + std::string(v) + "'");
}

struct RawEdge {
  long long from;
  long long to;
  std::optional<double> value;
  std::size_t line;
};

Graph build_graph(std::size_t n, ValueMode mode, const std::vector<RawEdge>& raw) {
  std::vector<Edge> edges;
  edges.reserve(raw.size());
  bool any_value = false;
  for (const RawEdge& r : raw) {
    try {
      edges.push_back({node_from_label(r.from, n), node_from_label(r.to, n)});
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(r.line) + ": " + e.what());
    }
    any_value = any_value || r.value.has_value();
  }
  if (!any_value) return Graph(n, std::move(edges));

  // Edges without a value are neutral: weight 1, energy 0.
  std::vector<double> values;
  values.reserve(raw.size());
  for (const RawEdge& r : raw) {
    const double v = r.value.value_or(mode == ValueMode::weight ? 1.0 : 0.0);
    if (mode == ValueMode::weight && !(v > 0.0 && v <= 1.0))
      throw ValidationError("line " + std::to_string(r.line) + ": weight must lie in (0, 1]");
    if (mode == ValueMode::energy && v < 0.0)
      throw ValidationError("line " + std::to_string(r.line) + ": energy must be >= 0");
    values.push_back(v);
  }
  return mode == ValueMode::weight ? Graph::with_weights(n, std::move(edges), std::move(values))
                                   : Graph::with_energies(n, std::move(edges), std::move(values));
}

}  // namespace

Graph parse_edge_list(std::string_view text) {
  std::optional<long long> n;
  std::optional<ValueMode> mode;
  std::vector<RawEdge> raw;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view physical = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    ++line_no;
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;

    if (const auto hash = physical.find('#'); hash != std::string_view::npos) physical = physical.substr(0, hash);

    std::size_t seg_pos = 0;
    while (seg_pos <= physical.size()) {
      const auto semi = physical.find(';', seg_pos);
      const std::string_view segment =
          trim(physical.substr(seg_pos, semi == std::string_view::npos ? std::string_view::npos : semi - seg_pos));
      seg_pos = semi == std::string_view::npos ? physical.size() + 1 : semi + 1;
      if (segment.empty()) continue;

      const auto tokens = split_ws(segment);
      if (tokens.front().find('=') != std::string_view::npos) {
        if (!raw.empty()) throw ParseError(line_no, "header entries must precede edges");
        for (std::string_view tok : tokens) {
          const auto eq = tok.find('=');
          if (eq == std::string_view::npos) throw ParseError(line_no, "expected key=value, got '" + std::string(tok) + "'");
          const auto key = tok.substr(0, eq);
          const auto value = tok.substr(eq + 1);
          if (key == "n") {
            long long v = 0;
            if (n) throw ParseError(line_no, "duplicate n= header");
            if (!parse_integer(value, v) || v < 1) throw ParseError(line_no, "n must be a positive integer");
            n = v;
          } else if (key == "mode") {
            if (mode) throw ParseError(line_no, "duplicate mode= header");
            mode = parse_mode(value, line_no);
          } else {
            throw ParseError(line_no, "unknown header key '" + std::string(key) + "'");
          }
        }
        continue;
      }

      if (!n) throw ParseError(line_no, "edge before the n= header");
      if (tokens.size() != 2 && tokens.size() != 3)
        throw ParseError(line_no, "expected '<i> <j>' or '<i> <j> <value>'");
      RawEdge e{0, 0, std::nullopt, line_no};
      if (!parse_integer(tokens[0], e.from) || !parse_integer(tokens[1], e.to))
        throw ParseError(line_no, "node labels must be integers");
      if (tokens.size() == 3) {
        double v = 0.0;
        if (!parse_real(tokens[2], v)) throw ParseError(line_no, "edge value must be a finite number");
        e.value = v;
      }
      raw.push_back(e);
    }
  }
  if (!n) throw ParseError(0, "missing n= header");
  return build_graph(static_cast<std::size_t>(*n), mode.value_or(ValueMode::weight), raw);
}

Graph parse_graph_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("n") || !doc.contains("edges"))
    throw ParseError(0, "JSON graph needs \"n\" and \"edges\"");
  if (!doc["n"].is_number_integer() || doc["n"].get<long long>() < 1)
    throw ParseError(0, "\"n\" must be a positive integer");
  ValueMode mode = ValueMode::weight;
  if (doc.contains("mode")) {
    if (!doc["mode"].is_string()) throw ParseError(0, "\"mode\" must be a string");
    mode = parse_mode(doc["mode"].get<std::string>(), 0);
  }
  if (!doc["edges"].is_array()) throw ParseError(0, "\"edges\" must be an array");

  std::vector<RawEdge> raw;
  std::size_t index = 0;
  for (const auto& item : doc["edges"]) {
    ++index;
    if (!item.is_array() || item.size() < 2 || item.size() > 3 || !item[0].is_number_integer() ||
        !item[1].is_number_integer() || (item.size() == 3 && !item[2].is_number()))
      throw ParseError(0, "edge #" + std::to_string(index) + " must be [i, j] or [i, j, value]");
    RawEdge e{item[0].get<long long>(), item[1].get<long long>(), std::nullopt, index};
    if (item.size() == 3) e.value = item[2].get<double>();
    raw.push_back(e);
  }
  return build_graph(static_cast<std::size_t>(doc["n"].get<long long>()), mode, raw);
}

Graph parse_graph(std::string_view text) {
  const auto body = trim(text);
  if (!body.empty() && body.front() == '{') return parse_graph_json(body);
  return parse_edge_list(text);
}

Graph read_graph_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open graph file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_graph(buf.str());
}

// ---------------------------------------------------------------------------
// Kernels

NonnegativeKernel::NonnegativeKernel(Matrix entries) : m_(std::move(entries)) {
  if (!m_.square() || m_.rows() == 0) throw ValidationError("kernel must be a non-empty square matrix");
  for (std::size_t i = 0; i < m_.rows(); ++i)
    for (double v : m_.row(i))
      if (!std::isfinite(v) || v < 0.0) throw ValidationError("kernel entries must be finite and >= 0");
}

Matrix NonnegativeKernel::energies() const {
  const std::size_t n = size();
  Matrix u(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double m = m_(i, j);
      u(i, j) = m > 0.0 ? (m == 1.0 ? 0.0 : -std::log(m)) : std::numeric_limits<double>::infinity();
    }
  return u;
}

NonnegativeKernel adjacency_kernel(const Graph& g) {
  Matrix m(g.size(), g.size());
  for (const Edge& e : g.edges()) m(e.from, e.to) = 1.0;
  return NonnegativeKernel(std::move(m));
}

NonnegativeKernel weighted_kernel(const Graph& g) {
  if (!g.has_costs()) throw PreconditionError("weighted kernel needs edge weights or energies");
  Matrix m(g.size(), g.size());
  const auto w = g.weights();
  for (std::size_t k = 0; k < g.edges().size(); ++k) m(g.edges()[k].from, g.edges()[k].to) = w[k];
  return NonnegativeKernel(std::move(m));
}

NonnegativeKernel teleport_kernel(const Graph& g, double teleport_energy) {
  if (!(teleport_energy > 0.0) || !std::isfinite(teleport_energy))
    throw DomainError("teleport energy must be a positive finite number");
  Matrix m(g.size(), g.size(), std::exp(-teleport_energy));
  const auto w = g.weights();
  for (std::size_t k = 0; k < g.edges().size(); ++k)
    m(g.edges()[k].from, g.edges()[k].to) = g.has_costs() ? w[k] : 1.0;
  return NonnegativeKernel(std::move(m));
}

Matrix edge_energy_matrix(const Graph& g) {
  Matrix u(g.size(), g.size(), std::numeric_limits<double>::infinity());
  const auto energies = g.energies();
  for (std::size_t k = 0; k < g.edges().size(); ++k)
    u(g.edges()[k].from, g.edges()[k].to) = g.has_costs() ? energies[k] : 0.0;
  return u;
}

Graph ensure_sink_loop(const Graph& g, Node sink) {
  if (sink >= g.size()) throw ValidationError("sink is outside 1.." + std::to_string(g.size()));
  return g.with_edge(sink, sink);
}

// ---------------------------------------------------------------------------
// Structure

Feasibility feasibility(const NonnegativeKernel& m, Node source, Node sink, std::size_t steps) {
  const std::size_t n = m.size();
  if (source >= n || sink >= n) throw ValidationError("source/sink outside the kernel");
  if (steps == 0) throw DomainError("number of steps must be >= 1");
  Vector row(n, 0.0);
  row[source] = 1.0;
  for (std::size_t t = 0; t < steps; ++t) row = transposed_product(m.matrix(), row);
  return {row[sink], row[sink] > 0.0};
}

namespace {

// Rows of a boolean n x n matrix as 64-bit words.
class BitMatrix {
 public:
  explicit BitMatrix(std::size_t n) : n_(n), words_((n + 63) / 64), bits_(n * words_, 0) {}

  void set(std::size_t i, std::size_t j) { bits_[i * words_ + j / 64] |= std::uint64_t{1} << (j % 64); }
  bool test(std::size_t i, std::size_t j) const { return (bits_[i * words_ + j / 64] >> (j % 64)) & 1U; }

  BitMatrix times(const BitMatrix& rhs) const {
    BitMatrix out(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      std::uint64_t* dst = out.bits_.data() + i * words_;
      for (std::size_t k = 0; k < n_; ++k) {
        if (!test(i, k)) continue;
        const std::uint64_t* src = rhs.bits_.data() + k * words_;
        for (std::size_t w = 0; w < words_; ++w) dst[w] |= src[w];
      }
    }
    return out;
  }

  bool all_set() const {
    std::size_t count = 0;
    for (std::uint64_t w : bits_) count += static_cast<std::size_t>(std::popcount(w));
    return count == n_ * n_;
  }

 private:
  std::size_t n_;
  std::size_t words_;
  std::vector<std::uint64_t> bits_;
};

BitMatrix support_of(const NonnegativeKernel& m) {
  BitMatrix s(m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j)
      if (m.has_support(i, j)) s.set(i, j);
  return s;
}

// Strong connectivity plus period 1, via BFS levels from node 0.
bool irreducible_and_aperiodic(const NonnegativeKernel& m) {
  const std::size_t n = m.size();
  auto bfs = [&](bool reverse) {
    std::vector<long long> level(n, -1);
    std::queue<std::size_t> q;
    level[0] = 0;
    q.push(0);
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop();
      for (std::size_t v = 0; v < n; ++v) {
        const bool arc = reverse ? m.has_support(v, u) : m.has_support(u, v);
        if (arc && level[v] < 0) {
          level[v] = level[u] + 1;
          q.push(v);
        }
      }
    }
    return level;
  };
  const auto forward = bfs(false);
  const auto backward = bfs(true);
  for (std::size_t v = 0; v < n; ++v)
    if (forward[v] < 0 || backward[v] < 0) return false;

  long long period = 0;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      if (m.has_support(u, v)) period = std::gcd(period, std::llabs(forward[u] + 1 - forward[v]));
  return period == 1;
}

}  // namespace

std::vector<std::vector<bool>> reachability(const NonnegativeKernel& m, std::size_t steps) {
  const std::size_t n = m.size();
  const BitMatrix s = support_of(m);
  BitMatrix p(n);
  for (std::size_t i = 0; i < n; ++i) p.set(i, i);
  for (std::size_t t = 0; t < steps; ++t) p = p.times(s);
  std::vector<std::vector<bool>> out(n, std::vector<bool>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i][j] = p.test(i, j);
  return out;
}

Primitivity is_primitive(const NonnegativeKernel& m) {
  if (!irreducible_and_aperiodic(m)) return {false, 0};
  const BitMatrix s = support_of(m);
  BitMatrix p = s;
  const std::size_t bound = wielandt_bound(m.size());
  for (std::size_t k = 1; k <= bound; ++k) {
    if (p.all_set()) return {true, k};
    p = p.times(s);
  }
  return {false, 0};  // unreachable for irreducible aperiodic kernels
}

}  // namespace bridgeflow
