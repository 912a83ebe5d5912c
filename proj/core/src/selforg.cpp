#include "tactica/selforg.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "tactica/errors.hpp"
#include "tactica/rng.hpp"

namespace tactica {
namespace {

// Closure node of window n: the node whose departing step first uses the
// values committed when the window closed. Transition-driven windows close
// on the node that opened the next window.
long closure_node(const tactical_game& spec, const transcript_window& w) {
  return spec.schedule.mode == window_schedule::kind::cells ? w.k_end + 1 : w.k_end;
}

}  // namespace

double evaluate_objective(const tactical_game& spec, const performance_functional& J,
                          const tactical_trace& trace) {
  if (J.integrand.empty() && J.terminal.empty())
    throw contract_error("objective: both integrand and terminal are empty");
  const trajectory& tr = trace.traj;
  if (tr.nodes() == 0) throw contract_error("objective: empty trajectory");

  int d = static_cast<int>(tr.phi[0].size());
  int m = static_cast<int>(tr.pure[0].size());
  int D = static_cast<int>(tr.hidden[0].size());
  int K = trace.comments.empty() ? 0 : static_cast<int>(trace.comments[0].size());
  const window_functionals& fs = spec.functionals;
  int M = fs.omega_dim();
  vec omega0 = fs.omega_init.size() == 0 ? vec(vec::Zero(M)) : fs.omega_init;

  std::vector<double> slots(static_cast<std::size_t>(1 + d + m + m + D + K + M));
  std::size_t wi = 0;  // windows whose closure node lies strictly before k
  auto fill = [&](long k) {
    while (wi < trace.transcript.windows.size() &&
           closure_node(spec, trace.transcript.windows[wi]) < k)
      ++wi;
    std::size_t p = 0;
    slots[p++] = tr.times[static_cast<std::size_t>(k)];
    for (int j = 0; j < d; ++j) slots[p++] = tr.phi[static_cast<std::size_t>(k)][j];
    for (int j = 0; j < m; ++j) slots[p++] = tr.pure[static_cast<std::size_t>(k)][j];
    for (int j = 0; j < m; ++j) slots[p++] = tr.realized[static_cast<std::size_t>(k)][j];
    for (int j = 0; j < D; ++j) slots[p++] = tr.hidden[static_cast<std::size_t>(k)][j];
    const vec& th = trace.comments[std::min(wi, trace.comments.size() - 1)];
    for (int j = 0; j < K; ++j) slots[p++] = th[j];
    const vec& om = wi == 0 ? omega0 : trace.transcript.windows[wi - 1].omega;
    for (int j = 0; j < M; ++j) slots[p++] = om[j];
  };

  double score = 0.0;
  if (!J.integrand.empty()) {
    fill(0);
    double prev = J.integrand.eval(slots);
    double acc = 0.0;
    for (long k = 1; k < tr.nodes(); ++k) {
      fill(k);
      double cur = J.integrand.eval(slots);
      acc += (prev + cur);
      prev = cur;
    }
    score += acc * (tr.h / 2);
  }
  if (!J.terminal.empty()) {
    fill(tr.nodes() - 1);
    score += J.terminal.eval(slots);
  }
  if (!std::isfinite(score)) throw numeric_error("objective evaluated to a non-finite value");
  return score;
}

std::optional<double> evaluate_theta(const tactical_game& spec, const theta_family& family,
                                     const vec& p, const performance_functional& J,
                                     const run_options& opts) {
  if (family.lower.size() != family.upper.size())
    throw contract_error("family: bound vectors differ in dimension");
  if (p.size() != family.param_dim())
    throw contract_error("family: parameter vector has wrong dimension");
  for (long j = 0; j < p.size(); ++j)
    if (p[j] < family.lower[j] || p[j] > family.upper[j])
      throw contract_error("family: parameter " + std::to_string(j + 1) + " out of bounds");

  tactical_game candidate = spec;
  candidate.comments = family.rule;
  candidate.params = p;
  try {
    tactical_trace trace = run_tactical(candidate, opts);
    return evaluate_objective(candidate, J, trace);
  } catch (const numeric_error&) {
    return std::nullopt;
  }
}

adapt_result adapt_theta(const tactical_game& spec, const theta_family& family, const vec& p0,
                         const performance_functional& J, const adapt_options& opts) {
  if (opts.budget < 0) throw contract_error("adapt: budget must be nonnegative");
  int P = family.param_dim();
  if (p0.size() != P) throw contract_error("adapt: initial parameters have wrong dimension");

  adapt_result result;
  result.params = p0;
  result.score = -std::numeric_limits<double>::infinity();
  if (opts.budget == 0) return result;

  auto probe = [&](const vec& p) -> std::optional<double> {
    ++result.evaluations;
    return evaluate_theta(spec, family, p, J, opts.run);
  };

  if (auto f = probe(p0)) {
    result.score = *f;
    result.history.push_back({result.evaluations, p0, *f});
  }

  splitmix64 rng(opts.seed);
  double step = opts.initial_step;
  while (result.evaluations < opts.budget && step >= opts.min_step) {
    bool improved = false;
    for (int j = 0; j < P && result.evaluations < opts.budget; ++j) {
      double dir = (rng.next_u64() & 1u) ? 1.0 : -1.0;
      for (double s : {dir, -dir}) {
        if (result.evaluations >= opts.budget) break;
        vec cand = result.params;
        cand[j] = std::min(std::max(cand[j] + s * step, family.lower[j]), family.upper[j]);
        if (cand[j] == result.params[j]) continue;  // clipped back onto the current point
        auto f = probe(cand);
        if (f && *f > result.score) {
          result.params = cand;
          result.score = *f;
          result.history.push_back({result.evaluations, cand, *f});
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return result;
}

}  // namespace tactica
