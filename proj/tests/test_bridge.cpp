#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "bridgeflow/bridge.hpp"
#include "bridgeflow/errors.hpp"
#include "bridgeflow/spectral.hpp"
#include "support.hpp"

using namespace bridgeflow;
namespace bt = bridgeflow::testing;

namespace {

Matrix random_primitive(bt::Rng& rng, std::size_t n, double density) {
  for (;;) {
    Matrix m = rng.support(n, density);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m(i, j) *= rng.uniform(0.1, 1.0);
    if (is_primitive(NonnegativeKernel(m)).primitive) return m;
  }
}

// Path law of a schedule over every walk in the kernel support.
std::map<Path, double> path_law(const TransitionSchedule& ts, const Matrix& m) {
  std::map<Path, double> law;
  const std::size_t n = ts.size();
  for (Node x = 0; x < n; ++x)
    for (Node y = 0; y < n; ++y)
      bt::for_each_walk(m, x, y, ts.horizon(), [&](const std::vector<std::size_t>& path, double) {
        const double p = path_probability(ts, path);
        if (p > 0.0) law[path] = p;
      });
  return law;
}

// Prior path measure mu0(x0) m_{x0x1} ... (unnormalized).
std::map<Path, double> prior_law(const Matrix& m, const Distribution& mu0, std::size_t N) {
  std::map<Path, double> law;
  for (Node x = 0; x < m.rows(); ++x)
    for (Node y = 0; y < m.rows(); ++y)
      bt::for_each_walk(m, x, y, N, [&](const std::vector<std::size_t>& path, double w) { law[path] = mu0[x] * w; });
  return law;
}

double schedule_distance(const TransitionSchedule& a, const TransitionSchedule& b) {
  double d = 0.0;
  for (std::size_t t = 0; t < a.horizon(); ++t) d = std::max(d, max_abs_difference(a.steps[t], b.steps[t]));
  return d;
}

}  // namespace

TEST_SUITE("bridge") {

TEST_CASE("distributions") {
  CHECK(delta_distribution(3, 1) == Distribution{0, 1, 0});
  CHECK(uniform_distribution(4) == Distribution{0.25, 0.25, 0.25, 0.25});
  CHECK_THROWS_AS(delta_distribution(3, 3), ValidationError);
  CHECK_NOTHROW(check_probability(Vector{0.5, 0.5}));
  CHECK_THROWS_AS(check_probability(Vector{0.5, 0.6}), DomainError);
  CHECK_THROWS_AS(check_probability(Vector{1.5, -0.5}), DomainError);
}

TEST_CASE("stochastic prior with its own marginals is reproduced") {
  const Matrix m = Matrix::from_rows({{0.5, 0.3, 0.2}, {0.1, 0.6, 0.3}, {0.4, 0.4, 0.2}});
  const Distribution nu0{0.2, 0.5, 0.3};
  Distribution nuN = nu0;
  const std::size_t N = 4;
  for (std::size_t t = 0; t < N; ++t) nuN = transposed_product(m, nuN);
  const auto sol = solve_and_schedule({NonnegativeKernel(m), N, nu0, nuN});
  for (const Matrix& pi : sol.schedule.steps) CHECK(max_abs_difference(pi, m) < 1e-10);
}

TEST_CASE("stationary marginals give the time-homogeneous walk") {
  const NonnegativeKernel a = adjacency_kernel(bt::example_graph());
  const StationaryWalk w = homogeneous_bridge(a);
  const auto sol = solve_and_schedule({a, 6, w.stationary, w.stationary});
  for (const Matrix& pi : sol.schedule.steps) CHECK(max_abs_difference(pi, w.kernel) < 1e-9);
  for (std::size_t t = 0; t <= 6; ++t) CHECK(max_abs_difference(sol.flow.rows.row(t), w.stationary) < 1e-9);
}

TEST_CASE("potentials satisfy the recursions and both boundary conditions") {
  bt::Rng rng(41);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = rng.index(2, 7);
    const Matrix m = random_primitive(rng, n, 0.6);
    const std::size_t N = rng.index(std::max<std::size_t>(1, is_primitive(NonnegativeKernel(m)).exponent), 8);
    const Distribution nu0 = rng.probability(n);
    const Distribution nuN = rng.probability(n);
    const PotentialSchedule s = solve_bridge({NonnegativeKernel(m), N, nu0, nuN});
    for (std::size_t t = 0; t < N; ++t) {
      for (Node i = 0; i < n; ++i) {
        double back = 0.0;
        double fwd = 0.0;
        for (Node j = 0; j < n; ++j) {
          back += m(i, j) * s.phi(t + 1, j);
          fwd += m(j, i) * s.phihat(t, j);
        }
        CHECK(s.phi(t, i) == doctest::Approx(back).epsilon(1e-12));
        CHECK(s.phihat(t + 1, i) == doctest::Approx(fwd).epsilon(1e-12));
      }
    }
    for (Node i = 0; i < n; ++i) {
      CHECK(s.phi(0, i) * s.phihat(0, i) == doctest::Approx(nu0[i]).epsilon(1e-10));
      CHECK(s.phi(N, i) * s.phihat(N, i) == doctest::Approx(nuN[i]).epsilon(1e-13));
    }
    const auto ts = transition_schedule(s, NonnegativeKernel(m), nu0);
    const auto flow = marginal_flow(ts);
    CHECK(max_abs_difference(flow.rows.row(N), std::span<const double>(nuN)) < 1e-10);
    for (const Matrix& pi : ts.steps)
      for (Node i = 0; i < n; ++i) {
        double row = 0.0;
        for (Node j = 0; j < n; ++j) row += pi(i, j);
        CHECK(row == doctest::Approx(1.0).epsilon(1e-10));
      }
  }
}

TEST_CASE("the schedule does not depend on the starting weights") {
  bt::Rng rng(43);
  for (int trial = 0; trial < 15; ++trial) {
    const std::size_t n = rng.index(2, 6);
    const NonnegativeKernel m(random_primitive(rng, n, 0.7));
    const std::size_t N = rng.index(is_primitive(m).exponent, 7);
    const Distribution nu0 = rng.probability(n);
    const Distribution nuN = rng.probability(n);
    const auto a = solve_and_schedule({m, N, nu0, nuN});
    const auto b = solve_and_schedule({m, N, nu0, nuN, rng.positive_vector(n, 0.01, 10.0)});
    CHECK(schedule_distance(a.schedule, b.schedule) < 1e-10);
  }
}

TEST_CASE("rescaling the potentials by powers of two leaves the schedule bit-identical") {
  const NonnegativeKernel b = weighted_kernel(bt::example_weighted_graph_2());
  const Distribution nu0 = delta_distribution(9, 0);
  const Distribution nuN = delta_distribution(9, 8);
  const PotentialSchedule s = solve_bridge({b, 4, nu0, nuN});
  const auto base = transition_schedule(s, b, nu0);
  for (int k : {-20, -3, 1, 5, 30}) {
    const auto other = transition_schedule(s.rescaled(std::ldexp(1.0, k)), b, nu0);
    for (std::size_t t = 0; t < 4; ++t) CHECK(other.steps[t] == base.steps[t]);
  }
  const auto approx = transition_schedule(s.rescaled(3.7), b, nu0);
  CHECK(schedule_distance(approx, base) < 1e-14);
  CHECK_THROWS_AS(s.rescaled(0.0), DomainError);
}

TEST_CASE("the Hilbert gap never increases") {
  bt::Rng rng(47);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = rng.index(2, 8);
    const NonnegativeKernel m(random_primitive(rng, n, 0.5));
    const std::size_t N = rng.index(is_primitive(m).exponent, 10);
    const PotentialSchedule s = solve_bridge({m, N, rng.probability(n), rng.probability(n)}, {1e-13, 10000});
    for (std::size_t k = 1; k < s.gap_history.size(); ++k) CHECK(s.gap_history[k] <= s.gap_history[k - 1] + 1e-13);
  }
}

TEST_CASE("delta marginals condition the prior on its endpoints") {
  bt::Rng rng(53);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = rng.index(2, 7);
    Matrix m = rng.support(n, 0.45);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m(i, j) *= rng.uniform(0.1, 1.0);
    const std::size_t N = rng.index(1, 5);
    const Node s = rng.index(0, n - 1);
    const Node t = rng.index(0, n - 1);
    const NonnegativeKernel k(m);
    if (feasibility(k, s, t, N).path_weight == 0.0) {
      CHECK_THROWS_AS(solve_bridge({k, N, delta_distribution(n, s), delta_distribution(n, t)}), FeasibilityError);
      continue;
    }
    const auto sol = solve_and_schedule({k, N, delta_distribution(n, s), delta_distribution(n, t)});
    double total = 0.0;
    bt::for_each_walk(m, s, t, N, [&](const auto&, double w) { total += w; });
    bt::for_each_walk(m, s, t, N, [&](const std::vector<std::size_t>& path, double w) {
      CHECK(path_probability(sol.schedule, path) == doctest::Approx(w / total).epsilon(1e-10));
    });
  }
}

TEST_CASE("only the stationary marginal yields a time-constant bridge") {
  bt::Rng rng(59);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t n = rng.index(3, 6);
    const NonnegativeKernel m(rng.positive_matrix(n, 0.1, 1.0));
    const StationaryWalk w = homogeneous_bridge(m);
    const std::size_t N = 3;
    const auto bar = solve_and_schedule({m, 2 * N, w.stationary, w.stationary});
    double spread = 0.0;
    for (std::size_t t = 1; t < 2 * N; ++t) spread = std::max(spread, max_abs_difference(bar.schedule.steps[t], bar.schedule.steps[0]));
    CHECK(spread < 1e-9);

    for (int k = 0; k < 10; ++k) {
      const Distribution nu = rng.probability(n);
      const auto other = solve_and_schedule({m, 2 * N, nu, nu});
      double var = 0.0;
      for (std::size_t t = 1; t < 2 * N; ++t) var = std::max(var, max_abs_difference(other.schedule.steps[t], other.schedule.steps[0]));
      CHECK(var >= 1e-6);
    }
  }
}

TEST_CASE("relative entropy") {
  const std::map<Path, double> p{{{0, 1}, 0.5}, {{1, 0}, 0.5}};
  CHECK(relative_entropy(p, p) == 0.0);
  const std::map<Path, double> q{{{0, 1}, 0.25}, {{1, 0}, 0.75}};
  CHECK(relative_entropy(p, q) == doctest::Approx(0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0)));
  const std::map<Path, double> r{{{0, 1}, 1.0}};
  CHECK(std::isinf(relative_entropy(p, r)));
  const std::map<Path, double> z{{{0, 1}, 1.0}, {{1, 0}, 0.0}};
  CHECK(relative_entropy(z, p) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("the bridge minimizes relative entropy among couplings with the same marginals") {
  bt::Rng rng(61);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = rng.index(2, 5);
    const NonnegativeKernel m(random_primitive(rng, n, 0.7));
    const std::size_t N = rng.index(std::max<std::size_t>(1, is_primitive(m).exponent), 4);
    const Distribution nu0 = rng.probability(n);
    const Distribution nuN = rng.probability(n);
    const auto sol = solve_and_schedule({m, N, nu0, nuN});
    const auto law = path_law(sol.schedule, m.matrix());
    const auto prior = prior_law(m.matrix(), uniform_distribution(n), N);
    const double best = relative_entropy(law, prior);

    std::vector<Path> paths;
    for (const auto& [path, p] : law) paths.push_back(path);
    int tried = 0;
    for (int k = 0; k < 400 && tried < 40; ++k) {
      // a(i,k) + b(j,l) -> c(i,l) + d(j,k) keeps both endpoint marginals
      const Path& a = paths[rng.index(0, paths.size() - 1)];
      const Path& b = paths[rng.index(0, paths.size() - 1)];
      const Path* c = nullptr;
      const Path* d = nullptr;
      for (const Path& p : paths) {
        if (!c && p.front() == a.front() && p.back() == b.back() && p != a) c = &p;
        if (!d && p.front() == b.front() && p.back() == a.back() && p != b) d = &p;
      }
      if (!c || !d || a == b) continue;
      auto perturbed = law;
      const double eps = 0.5 * std::min(law.at(a), law.at(b)) * rng.uniform(0.01, 1.0);
      perturbed[a] -= eps;
      perturbed[b] -= eps;
      perturbed[*c] += eps;
      perturbed[*d] += eps;
      CHECK(relative_entropy(perturbed, prior) >= best - 1e-12);
      ++tried;
    }
    CHECK(tried > 0);
  }
}

TEST_CASE("infeasible supports and exhausted iterations are reported") {
  const NonnegativeKernel a = adjacency_kernel(bt::example_graph());
  try {
    solve_bridge({a, 2, delta_distribution(9, 0), delta_distribution(9, 8)});
    FAIL("expected infeasibility");
  } catch (const FeasibilityError& e) {
    CHECK(std::string(e.what()).find("state 1") != std::string::npos);
  }
  bt::Rng rng(67);
  const Distribution nu0 = rng.probability(9);
  const Distribution nuN = rng.probability(9);
  try {
    solve_bridge({a, 12, nu0, nuN}, {1e-15, 2});
    FAIL("expected non-convergence");
  } catch (const ConvergenceError& e) {
    CHECK(e.residual() > 0.0);
  }
  CHECK_THROWS_AS(solve_bridge({a, 0, nu0, nuN}), DomainError);
  CHECK_THROWS_AS(solve_bridge({a, 3, Distribution{1.0}, nuN}), DomainError);
  CHECK_THROWS_AS(solve_bridge({a, 3, nu0, nuN, Distribution(9, 0.0)}), DomainError);
}

}
