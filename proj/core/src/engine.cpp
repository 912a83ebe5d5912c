#include "tactica/engine.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "runloop.hpp"
#include "tactica/errors.hpp"
#include "tactica/layouts.hpp"

namespace tactica {

double eval_control(const game& g, int player, double pure, const vec& phi, const vec& hidden,
                    const vec& theta, const vec& lambda) {
  if (player < 0 || player >= g.player_count())
    throw contract_error("eval_control: player index out of range");
  const feedback_law& fb = g.feedbacks[static_cast<std::size_t>(player)];
  if (phi.size() != g.state_dim) throw contract_error("eval_control: state has wrong dimension");
  if (hidden.size() != fb.hidden_dim())
    throw contract_error("eval_control: hidden parameters have wrong dimension");
  bool fb_known = g.binding.feedback == binding_mode::known;
  bool lam_known = g.binding.lambda_feedback == binding_mode::known;
  std::vector<double> slots(static_cast<std::size_t>(1 + g.state_dim + fb.hidden_dim() +
                                                     (fb_known ? theta.size() : 0) +
                                                     (lam_known ? lambda.size() : 0)));
  std::size_t p = 0;
  slots[p++] = pure;
  for (int j = 0; j < g.state_dim; ++j) slots[p++] = phi[j];
  for (long j = 0; j < hidden.size(); ++j) slots[p++] = hidden[j];
  if (fb_known)
    for (long j = 0; j < theta.size(); ++j) slots[p++] = theta[j];
  if (lam_known)
    for (long j = 0; j < lambda.size(); ++j) slots[p++] = lambda[j];
  return fb.coupling.eval(slots);
}

vec aggregate_coalition(const game& g, const vec& pure, const vec& phi, const vec& hidden_stacked,
                        const vec& theta, const vec& lambda) {
  if (!g.coalitions) throw contract_error("aggregate_coalition: game has no coalitions");
  if (pure.size() != g.player_count())
    throw contract_error("aggregate_coalition: pure controls have wrong dimension");
  if (hidden_stacked.size() != g.hidden_total())
    throw contract_error("aggregate_coalition: hidden parameters have wrong dimension");
  const auto& groups = g.coalitions->groups;
  vec out(static_cast<long>(groups.size()));
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const coalition& grp = groups[gi];
    if (grp.aggregator.empty()) {
      double acc = 0.0;
      for (int i : grp.members) {
        int off = g.hidden_offset(i);
        int di = g.feedbacks[static_cast<std::size_t>(i)].hidden_dim();
        acc += eval_control(g, i, pure[i], phi, hidden_stacked.segment(off, di), theta, lambda);
      }
      out[static_cast<long>(gi)] = acc;
    } else {
      std::vector<double> slots(
          static_cast<std::size_t>(g.player_count() + g.state_dim + g.hidden_total()));
      std::size_t p = 0;
      for (int j = 0; j < g.player_count(); ++j) slots[p++] = pure[j];
      for (int j = 0; j < g.state_dim; ++j) slots[p++] = phi[j];
      for (int j = 0; j < g.hidden_total(); ++j) slots[p++] = hidden_stacked[j];
      out[static_cast<long>(gi)] = grp.aggregator.eval(slots);
    }
  }
  return out;
}

game_state step(const game& g, const game_state& s, const vec& channels, double h,
                const vec& theta, const vec& omega) {
  if (!(h > 0.0)) throw contract_error("step: step size must be positive");
  if (s.phi.size() != g.state_dim) throw contract_error("step: state has wrong dimension");
  if (channels.size() != g.field_channels())
    throw contract_error("step: wrong number of control channels");
  // The schedule is frozen at the step's start, like every exogenous input.
  vec lambda(static_cast<long>(g.lambda_schedule.size()));
  double tslot[1] = {s.t};
  for (long l = 0; l < lambda.size(); ++l)
    lambda[l] = g.lambda_schedule[static_cast<std::size_t>(l)].eval(tslot);
  auto field = [&](double ts, const vec& ph) {
    return detail::eval_field_const(g, ts, ph, channels, theta, omega, lambda);
  };
  game_state out;
  out.phi = detail::rk4_step(s.t, s.phi, h, field);
  out.t = s.t + h;
  return out;
}

trajectory simulate(const game& g, const run_options& opts) {
  tactical_game spec;
  spec.base = g;
  return detail::run_windowed(spec, opts).traj;
}

std::vector<invariant_report> check_invariant_functionals(const game& g, const trajectory& tr) {
  std::vector<invariant_report> out;
  if (g.invariants.empty()) return out;
  if (tr.nodes() == 0) throw contract_error("invariant check: empty trajectory");
  int d = g.state_dim, m = g.player_count(), D = g.hidden_total();
  std::vector<double> slots(static_cast<std::size_t>(1 + d + m + m + D));
  for (const auto& inv : g.invariants) {
    invariant_report rep;
    rep.name = inv.name;
    rep.tolerance = inv.tolerance;
    double first = 0.0;
    for (long k = 0; k < tr.nodes(); ++k) {
      std::size_t p = 0;
      slots[p++] = tr.times[static_cast<std::size_t>(k)];
      for (int j = 0; j < d; ++j) slots[p++] = tr.phi[static_cast<std::size_t>(k)][j];
      for (int j = 0; j < m; ++j) slots[p++] = tr.pure[static_cast<std::size_t>(k)][j];
      for (int j = 0; j < m; ++j) slots[p++] = tr.realized[static_cast<std::size_t>(k)][j];
      for (int j = 0; j < D; ++j) slots[p++] = tr.hidden[static_cast<std::size_t>(k)][j];
      double v = inv.value.eval(slots);
      if (!std::isfinite(v))
        throw numeric_error("invariant '" + inv.name + "' is non-finite along the run");
      if (k == 0)
        first = v;
      else
        rep.drift = std::max(rep.drift, std::abs(v - first));
    }
    rep.within = rep.drift <= rep.tolerance;
    out.push_back(std::move(rep));
  }
  return out;
}

long step_count(double /*t0*/, double horizon, double h) {
  if (!(h > 0.0)) throw contract_error("run: step must be positive");
  if (!(horizon > 0.0)) throw contract_error("run: horizon must be positive");
  long n = std::llround(horizon / h);
  if (n < 1) throw contract_error("run: horizon shorter than one step");
  if (std::abs(static_cast<double>(n) * h - horizon) > 1e-9 * std::max(1.0, std::abs(horizon)))
    throw contract_error("run: horizon must be an integral number of steps");
  return n;
}

}  // namespace tactica
