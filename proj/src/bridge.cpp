#include "bridgeflow/bridge.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "bridgeflow/errors.hpp"
#include "bridgeflow/simd/kernels.hpp"
#include "bridgeflow/spectral.hpp"

namespace bridgeflow {

Distribution delta_distribution(std::size_t n, Node at) {
  if (at >= n) throw ValidationError("delta node outside 1.." + std::to_string(n));
  Distribution d(n, 0.0);
  d[at] = 1.0;
  return d;
}

Distribution uniform_distribution(std::size_t n) {
  return Distribution(n, 1.0 / static_cast<double>(n));
}

void check_probability(std::span<const double> d, double tol) {
  double sum = 0.0;
  for (double v : d) {
    if (!std::isfinite(v) || v < 0.0) throw DomainError("distribution entries must be finite and >= 0");
    sum += v;
  }
  if (std::abs(sum - 1.0) > tol) throw DomainError("distribution sums to " + std::to_string(sum) + ", not 1");
}

double PotentialSchedule::phi(std::size_t t, Node i) const {
  return phi_scaled(t, i) * std::exp(phi_log_scale[t]);
}

double PotentialSchedule::phihat(std::size_t t, Node i) const {
  return phihat_scaled(t, i) * std::exp(phihat_log_scale[t]);
}

PotentialSchedule PotentialSchedule::rescaled(double c) const {
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("rescale factor must be positive");
  PotentialSchedule s = *this;
  const std::size_t n = size();
  for (std::size_t t = 0; t <= horizon(); ++t) {
    simd::active_kernels().scale(s.phi_scaled.row(t).data(), c, n);
    simd::active_kernels().scale(s.phihat_scaled.row(t).data(), 1.0 / c, n);
  }
  return s;
}

namespace {

std::vector<Node> support(const Distribution& d) {
  std::vector<Node> s;
  for (Node i = 0; i < d.size(); ++i)
    if (d[i] > 0.0) s.push_back(i);
  return s;
}

void check_support_compatibility(const BridgeProblem& p) {
  const auto reach = reachability(p.prior, p.horizon);
  const auto from = support(p.nu0);
  const auto to = support(p.nuN);
  for (Node i : from) {
    bool ok = false;
    for (Node j : to) ok = ok || reach[i][j];
    if (!ok)
      throw FeasibilityError("state " + std::to_string(label_of(i)) + " carries initial mass but reaches no target state in " +
                             std::to_string(p.horizon) + " steps ((M^N) restricted to the supports has a zero row)");
  }
  for (Node j : to) {
    bool ok = false;
    for (Node i : from) ok = ok || reach[i][j];
    if (!ok)
      throw FeasibilityError("state " + std::to_string(label_of(j)) + " carries final mass but is reached from no initial state in " +
                             std::to_string(p.horizon) + " steps ((M^N) restricted to the supports has a zero column)");
  }
}

// x <- x / max(x); returns log(max).
double normalize_max(std::span<double> x) {
  const auto& k = simd::active_kernels();
  const double m = k.max_element(x.data(), x.size());
  if (!(m > 0.0) || !std::isfinite(m)) throw FeasibilityError("potential vanished during propagation");
  k.scale(x.data(), 1.0 / m, x.size());
  return std::log(m);
}

Vector gather(const Vector& v, const std::vector<Node>& idx) {
  Vector out(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) out[k] = v[idx[k]];
  return out;
}

}  // namespace

PotentialSchedule solve_bridge(const BridgeProblem& p, SolveOptions options) {
  const std::size_t n = p.prior.size();
  const std::size_t N = p.horizon;
  if (N == 0) throw DomainError("horizon must be >= 1");
  if (p.nu0.size() != n || p.nuN.size() != n) throw DomainError("marginal length does not match the kernel");
  check_probability(p.nu0);
  check_probability(p.nuN);
  Distribution mu0 = p.mu0.empty() ? uniform_distribution(n) : p.mu0;
  if (mu0.size() != n) throw DomainError("mu0 length does not match the kernel");
  for (double v : mu0)
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("mu0 must be strictly positive");
  check_support_compatibility(p);

  const auto& k = simd::active_kernels();
  const Matrix& m = p.prior.matrix();
  const auto s0 = support(p.nu0);
  const auto sN = support(p.nuN);

  PotentialSchedule out;
  Vector head(n, 0.0);  // phihat(0), up to scale
  for (Node i : s0) head[i] = mu0[i];
  Vector fwd(n), bwd(n), tmp(n);

  bool converged = false;
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    fwd = head;
    for (std::size_t t = 0; t < N; ++t) {
      k.matvec_transposed(m.data(), n, fwd.data(), tmp.data());
      fwd.swap(tmp);
      normalize_max(fwd);
    }
    std::fill(bwd.begin(), bwd.end(), 0.0);
    for (Node j : sN) bwd[j] = p.nuN[j] / fwd[j];
    normalize_max(bwd);
    for (std::size_t t = 0; t < N; ++t) {
      k.matvec(m.data(), n, bwd.data(), tmp.data());
      bwd.swap(tmp);
      normalize_max(bwd);
    }
    Vector next(n, 0.0);
    for (Node i : s0) next[i] = p.nu0[i] / bwd[i];

    gap = hilbert_distance(gather(next, s0), gather(head, s0));
    head.swap(next);
    out.gap_history.push_back(gap);
    out.iterations = it;
    if (gap < options.tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw ConvergenceError("Schrodinger iteration did not converge in " + std::to_string(options.max_iter) +
                               " iterations (last Hilbert gap " + std::to_string(gap) + ")",
                           gap);

  // Final sweep with tracked scales: phihat forward from head, phi backward
  // from the terminal condition, so both recursions hold and the terminal
  // boundary product is exact.
  out.phihat_scaled = Matrix(N + 1, n);
  out.phi_scaled = Matrix(N + 1, n);
  out.phihat_log_scale.assign(N + 1, 0.0);
  out.phi_log_scale.assign(N + 1, 0.0);

  std::copy(head.begin(), head.end(), out.phihat_scaled.row(0).begin());
  out.phihat_log_scale[0] = normalize_max(out.phihat_scaled.row(0));
  for (std::size_t t = 0; t < N; ++t) {
    k.matvec_transposed(m.data(), n, out.phihat_scaled.row(t).data(), out.phihat_scaled.row(t + 1).data());
    out.phihat_log_scale[t + 1] = out.phihat_log_scale[t] + normalize_max(out.phihat_scaled.row(t + 1));
  }

  auto terminal = out.phi_scaled.row(N);
  for (Node j : sN) terminal[j] = p.nuN[j] / out.phihat_scaled(N, j);
  out.phi_log_scale[N] = -out.phihat_log_scale[N] + normalize_max(terminal);
  for (std::size_t t = N; t-- > 0;) {
    k.matvec(m.data(), n, out.phi_scaled.row(t + 1).data(), out.phi_scaled.row(t).data());
    out.phi_log_scale[t] = out.phi_log_scale[t + 1] + normalize_max(out.phi_scaled.row(t));
  }
  return out;
}

TransitionSchedule transition_schedule(const PotentialSchedule& s, const NonnegativeKernel& m, const Distribution& nu0) {
  const std::size_t n = m.size();
  const std::size_t N = s.horizon();
  if (s.size() != n || nu0.size() != n) throw DomainError("schedule size does not match the kernel");
  TransitionSchedule ts;
  ts.nu0 = nu0;
  ts.steps.reserve(N);
  for (std::size_t t = 0; t < N; ++t) {
    Matrix pi(n, n);
    const double carry = std::exp(s.phi_log_scale[t + 1] - s.phi_log_scale[t]);
    for (std::size_t i = 0; i < n; ++i) {
      const double here = s.phi_scaled(t, i);
      if (here == 0.0) continue;  // 0/0 = 0
      const double factor = carry / here;
      for (std::size_t j = 0; j < n; ++j) pi(i, j) = m(i, j) * s.phi_scaled(t + 1, j) * factor;
    }
    ts.steps.push_back(std::move(pi));
  }
  return ts;
}

MarginalFlow marginal_flow(const TransitionSchedule& ts) {
  const std::size_t n = ts.size();
  MarginalFlow f{Matrix(ts.horizon() + 1, n)};
  std::copy(ts.nu0.begin(), ts.nu0.end(), f.rows.row(0).begin());
  for (std::size_t t = 0; t < ts.horizon(); ++t)
    simd::active_kernels().matvec_transposed(ts.steps[t].data(), n, f.rows.row(t).data(), f.rows.row(t + 1).data());
  return f;
}

double path_probability(const TransitionSchedule& ts, std::span<const Node> path) {
  if (path.size() != ts.horizon() + 1)
    throw DomainError("path has " + std::to_string(path.size()) + " nodes, expected " + std::to_string(ts.horizon() + 1));
  for (Node x : path)
    if (x >= ts.size()) throw DomainError("path node outside the state space");
  double p = ts.nu0[path[0]];
  for (std::size_t t = 0; t < ts.horizon() && p > 0.0; ++t) p *= ts.steps[t](path[t], path[t + 1]);
  return p;
}

double relative_entropy(const std::map<Path, double>& p, const std::map<Path, double>& q) {
  double d = 0.0;
  for (const auto& [path, pv] : p) {
    if (pv <= 0.0) continue;
    const auto it = q.find(path);
    if (it == q.end() || it->second <= 0.0) return std::numeric_limits<double>::infinity();
    d += pv * std::log(pv / it->second);
  }
  return d;
}

BridgeSolution solve_and_schedule(const BridgeProblem& problem, SolveOptions options) {
  BridgeSolution s;
  s.potentials = solve_bridge(problem, options);
  s.schedule = transition_schedule(s.potentials, problem.prior, problem.nu0);
  s.flow = marginal_flow(s.schedule);
  return s;
}

}  // namespace bridgeflow
