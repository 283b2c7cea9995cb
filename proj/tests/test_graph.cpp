#include <doctest.h>

#include <cmath>

#include "bridgeflow/errors.hpp"
#include "bridgeflow/graph.hpp"
#include "support.hpp"

using namespace bridgeflow;
namespace bt = bridgeflow::testing;

TEST_SUITE("graph") {

TEST_CASE("parse a two-node cycle with ';' separators") {
  const Graph g = parse_graph("n=2; 1 2; 2 1");
  CHECK(g.size() == 2);
  REQUIRE(g.edges().size() == 2);
  CHECK(g.edges()[0] == Edge{0, 1});
  CHECK(g.edges()[1] == Edge{1, 0});
  CHECK_FALSE(g.has_costs());
}

TEST_CASE("parse the example network file") {
  const Graph g = read_graph_file(BRIDGEFLOW_DATA_DIR "/fig1.txt");
  CHECK(g.size() == 9);
  CHECK(g.edges().size() == 16);
  CHECK(g.has_edge(8, 8));
  CHECK(adjacency_kernel(g).matrix() == Matrix::from_rows(bt::example_adjacency()));
}

TEST_CASE("endpoint out of range is a validation error") {
  CHECK_THROWS_AS(parse_graph("n=2; 1 3"), ValidationError);
  CHECK_THROWS_AS(parse_graph("n=2\n0 1\n"), ValidationError);
}

TEST_CASE("duplicate edges are rejected") {
  CHECK_THROWS_AS(parse_graph("n=3\n1 2\n2 3\n1 2\n"), ValidationError);
}

TEST_CASE("malformed lines report their line number") {
  try {
    parse_graph("# header comment\nn=3\n1 2\n2 x\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
  CHECK_THROWS_AS(parse_graph("1 2\n"), ParseError);
  CHECK_THROWS_AS(parse_graph("n=3\n1 2 3 4\n"), ParseError);
  CHECK_THROWS_AS(parse_graph("n=0\n"), ParseError);
  CHECK_THROWS_AS(parse_graph("n=3 mode=cost\n"), ParseError);
  CHECK_THROWS_AS(parse_graph("n=3\n1 2\nn=4\n"), ParseError);
  CHECK_THROWS_AS(parse_graph("n=3\n1.5 2\n"), ParseError);
}

TEST_CASE("comments and blank lines are ignored") {
  const Graph g = parse_graph("# a\n\nn=3   # nodes\n\n1 2 # edge\n  # nothing\n2 3\n");
  CHECK(g.edges().size() == 2);
}

TEST_CASE("weight and energy modes") {
  const Graph w = parse_graph("n=2 mode=weight\n1 2 0.5\n2 1\n");
  REQUIRE(w.has_costs());
  CHECK(weighted_kernel(w)(0, 1) == 0.5);
  CHECK(weighted_kernel(w)(1, 0) == 1.0);
  CHECK(w.energies()[0] == doctest::Approx(std::log(2.0)));
  CHECK(w.energies()[1] == 0.0);

  const Graph e = parse_graph("n=2\nmode=energy\n1 2 0.6931471805599453\n2 1 0\n");
  CHECK(weighted_kernel(e)(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(weighted_kernel(e)(1, 0) == 1.0);

  CHECK_THROWS_AS(parse_graph("n=2\n1 2 0\n"), ValidationError);
  CHECK_THROWS_AS(parse_graph("n=2\n1 2 -1\n"), ValidationError);
  CHECK_THROWS_AS(parse_graph("n=2\n1 2 1.5\n"), ValidationError);
  CHECK_THROWS_AS(parse_graph("n=2 mode=energy\n1 2 -0.1\n"), ValidationError);
}

TEST_CASE("JSON documents") {
  const Graph g = parse_graph(R"({"n": 3, "mode": "energy", "edges": [[1, 2, 0.5], [2, 3], [3, 1, 1.0]]})");
  CHECK(g.size() == 3);
  CHECK(g.edges().size() == 3);
  CHECK(g.energies()[1] == 0.0);
  CHECK(weighted_kernel(g)(2, 0) == doctest::Approx(std::exp(-1.0)));
  CHECK_THROWS_AS(parse_graph(R"({"n": 3, "edges": [[1, 4]]})"), ValidationError);
  CHECK_THROWS_AS(parse_graph(R"({"n": 3, "edges": [[1]]})"), ParseError);
  CHECK_THROWS_AS(parse_graph(R"({"n": 3, "edges": )"), ParseError);
  CHECK_THROWS_AS(parse_graph(R"({"edges": []})"), ParseError);
}

TEST_CASE("adjacency kernel") {
  CHECK(adjacency_kernel(parse_graph("n=2;1 2;2 1")).matrix() == Matrix::from_rows({{0, 1}, {1, 0}}));
  CHECK(adjacency_kernel(Graph(3, {})).matrix() == Matrix(3, 3));
  // support equals the edge set
  const Graph g = bt::example_graph();
  const auto a = adjacency_kernel(g);
  for (Node i = 0; i < 9; ++i)
    for (Node j = 0; j < 9; ++j) CHECK(a.has_support(i, j) == g.has_edge(i, j));
}

TEST_CASE("weighted kernel") {
  const auto b = weighted_kernel(bt::example_weighted_graph());
  Matrix expected = Matrix::from_rows(bt::example_adjacency());
  expected(6, 8) = 0.5;
  CHECK(b.matrix() == expected);

  const Graph g = bt::example_graph();
  const Graph zero = Graph::with_energies(9, g.edges(), std::vector<double>(g.edges().size(), 0.0));
  CHECK(weighted_kernel(zero).matrix() == adjacency_kernel(g).matrix());

  const Graph half = Graph::with_energies(2, {{0, 1}}, {std::log(2.0)});
  CHECK(weighted_kernel(half)(0, 1) == doctest::Approx(0.5).epsilon(1e-15));

  CHECK_THROWS_AS(weighted_kernel(g), PreconditionError);
}

TEST_CASE("teleport kernel") {
  const Graph g = bt::example_subgraph();
  const auto t8 = teleport_kernel(g, 8.0);
  for (Node i = 0; i < 9; ++i)
    for (Node j = 0; j < 9; ++j) {
      if (g.has_edge(i, j))
        CHECK(t8(i, j) == 1.0);
      else
        CHECK(t8(i, j) == doctest::Approx(3.3546262790251185e-4).epsilon(1e-12));
    }
  const auto t2 = teleport_kernel(g, 2.0);
  CHECK(t2(0, 3) == doctest::Approx(std::exp(-2.0)));
  CHECK(t2(0, 0) == doctest::Approx(std::exp(-2.0)));  // absent self-loops are virtual edges too

  std::vector<Edge> all;
  for (Node i = 0; i < 3; ++i)
    for (Node j = 0; j < 3; ++j) all.push_back({i, j});
  const Graph complete = Graph::with_weights(3, all, std::vector<double>(9, 0.25));
  CHECK(teleport_kernel(complete, 5.0).matrix() == weighted_kernel(complete).matrix());

  CHECK_THROWS_AS(teleport_kernel(g, 0.0), DomainError);
}

TEST_CASE("teleport kernel dominates the weighted kernel, strictly on non-edges") {
  bt::Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = rng.index(2, 7);
    const Graph s = bt::graph_from_support(rng.support(n, 0.4));
    std::vector<double> w;
    for (std::size_t k = 0; k < s.edges().size(); ++k) w.push_back(rng.uniform(0.05, 1.0));
    const Graph g = Graph::with_weights(n, s.edges(), w);
    const auto b = weighted_kernel(g);
    const auto t = teleport_kernel(g, rng.uniform(0.5, 20.0));
    for (Node i = 0; i < n; ++i)
      for (Node j = 0; j < n; ++j) {
        CHECK(t(i, j) >= b(i, j));
        if (!g.has_edge(i, j)) CHECK(t(i, j) > b(i, j));
      }
  }
}

TEST_CASE("ensure_sink_loop") {
  const Graph g = bt::example_graph().without_edge(8, 8);
  CHECK_FALSE(g.has_edge(8, 8));
  const Graph looped = ensure_sink_loop(g, 8);
  CHECK(looped.has_edge(8, 8));
  CHECK(looped.edges().size() == 16);
  CHECK(ensure_sink_loop(looped, 8).edges() == looped.edges());

  const Graph w = bt::example_weighted_graph_2().without_edge(8, 8);
  const Graph wl = ensure_sink_loop(w, 8);
  CHECK(weighted_kernel(wl)(8, 8) == 1.0);  // zero-energy loop

  CHECK_THROWS_AS(ensure_sink_loop(g, node_from_label(0, 9)), ValidationError);
  CHECK_THROWS_AS(ensure_sink_loop(g, 9), ValidationError);
}

TEST_CASE("feasibility counts paths of the example network") {
  const auto a = adjacency_kernel(bt::example_graph());
  const auto f3 = feasibility(a, 0, 8, 3);
  CHECK(f3.path_weight == 3.0);
  CHECK(f3.feasible);
  CHECK(feasibility(a, 0, 8, 4).path_weight == 7.0);
  CHECK_FALSE(feasibility(a, 0, 8, 2).feasible);

  const auto disconnected = adjacency_kernel(parse_graph("n=3\n1 2\n2 1\n3 3\n"));
  for (std::size_t N = 1; N < 6; ++N) {
    CHECK(feasibility(disconnected, 0, 2, N).path_weight == 0.0);
    CHECK_FALSE(feasibility(disconnected, 0, 2, N).feasible);
  }
}

TEST_CASE("feasibility equals DFS path enumeration") {
  bt::Rng rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = rng.index(2, 9);
    const Matrix s = rng.support(n, rng.uniform(0.15, 0.5));
    const NonnegativeKernel k(s);
    const std::size_t N = rng.index(1, 6);
    const Node i = rng.index(0, n - 1);
    const Node j = rng.index(0, n - 1);
    CHECK(feasibility(k, i, j, N).path_weight == bt::dfs_path_count(s, i, j, N));
  }
}

TEST_CASE("primitivity") {
  const auto ones = is_primitive(NonnegativeKernel(Matrix::from_rows({{1, 1}, {1, 1}})));
  CHECK(ones.primitive);
  CHECK(ones.exponent == 1);

  CHECK_FALSE(is_primitive(NonnegativeKernel(Matrix::from_rows({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}}))).primitive);
  CHECK_FALSE(is_primitive(NonnegativeKernel(Matrix::from_rows({{1, 1}, {0, 1}}))).primitive);

  const auto example = is_primitive(adjacency_kernel(bt::example_graph()));
  CHECK(example.primitive);
  CHECK(example.exponent == bt::direct_primitive_exponent(Matrix::from_rows(bt::example_adjacency())));

  // Wielandt's extremal matrix attains the bound exactly.
  const std::size_t n = 5;
  Matrix w(n, n);
  for (std::size_t i = 0; i + 1 < n; ++i) w(i, i + 1) = 1;
  w(n - 1, 0) = 1;
  w(n - 1, 1) = 1;
  const auto wp = is_primitive(NonnegativeKernel(w));
  CHECK(wp.primitive);
  CHECK(wp.exponent == wielandt_bound(n));
}

TEST_CASE("is_primitive agrees with direct powers on random graphs") {
  bt::Rng rng(5);
  int primitive_seen = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = rng.index(1, 6);
    const Matrix s = rng.support(n, rng.uniform(0.2, 0.6));
    const auto got = is_primitive(NonnegativeKernel(s));
    const std::size_t want = bt::direct_primitive_exponent(s);
    CHECK(got.primitive == (want > 0));
    CHECK(got.exponent == want);
    primitive_seen += got.primitive;
  }
  CHECK(primitive_seen > 20);
}

}
