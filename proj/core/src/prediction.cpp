#include "tactica/prediction.hpp"

#include <cmath>
#include <string>

#include "runloop.hpp"
#include "tactica/errors.hpp"

namespace tactica {
namespace {

vec schedule_at(const game& g, double t) {
  vec lambda(static_cast<long>(g.lambda_schedule.size()));
  double slot[1] = {t};
  for (long l = 0; l < lambda.size(); ++l)
    lambda[l] = g.lambda_schedule[static_cast<std::size_t>(l)].eval(slot);
  return lambda;
}

}  // namespace

epsilon_estimate estimate_epsilon(const game& g, const trajectory& tr, int player,
                                  long k_begin, long k_end, const vec& theta) {
  if (player < 0 || player >= g.player_count())
    throw contract_error("estimation: player index out of range");
  if (k_begin < 0 || k_end >= tr.nodes() || k_end < k_begin + 1)
    throw contract_error("estimation: window must hold at least 2 trajectory nodes");
  int di = g.feedbacks[static_cast<std::size_t>(player)].hidden_dim();
  if (di == 0) throw contract_error("estimation: player has no hidden components");

  long rows = k_end - k_begin + 1;
  Eigen::MatrixXd A(rows, di);
  Eigen::VectorXd b(rows);
  epsilon_estimate est;

  vec probe0 = vec::Zero(di);
  for (long k = k_begin; k <= k_end; ++k) {
    double u0 = tr.pure[static_cast<std::size_t>(k)][player];
    const vec& phi = tr.phi[static_cast<std::size_t>(k)];
    double u_obs = tr.realized[static_cast<std::size_t>(k)][player];
    vec lambda = schedule_at(g, tr.times[static_cast<std::size_t>(k)]);
    double c0 = eval_control(g, player, u0, phi, probe0, theta, lambda);
    for (int j = 0; j < di; ++j) {
      vec e = vec::Zero(di);
      e[j] = 1.0;
      double gj = eval_control(g, player, u0, phi, e, theta, lambda) - c0;
      e[j] = 2.0;
      double g2 = eval_control(g, player, u0, phi, e, theta, lambda) - c0;
      if (std::abs(g2 - 2.0 * gj) > 1e-8 * std::max(1.0, std::abs(gj))) est.linear = false;
      A(k - k_begin, j) = gj;
    }
    b[k - k_begin] = u_obs - c0;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  est.identifiable = qr.rank() == di;
  est.value = qr.solve(b);
  est.residual = (A * est.value - b).cwiseAbs().maxCoeff();
  return est;
}

std::vector<epsilon_estimate> estimate_epsilon_by_window(const game& g, const trajectory& tr,
                                                         const dialogue_transcript& transcript,
                                                         int player, const vec& theta) {
  std::vector<epsilon_estimate> out;
  out.reserve(transcript.windows.size());
  for (const auto& w : transcript.windows)
    out.push_back(estimate_epsilon(g, tr, player, w.k_begin, w.k_end, theta));
  return out;
}

trajectory predict_trajectory(const game& g, const vec& phi_start, double t_start,
                              double horizon, const vec& eps_assumed, const run_options& opts) {
  if (!(horizon > 0.0)) throw contract_error("prediction: horizon must be positive");
  if (eps_assumed.size() != g.hidden_total())
    throw contract_error("prediction: assumed hidden parameters have wrong dimension");
  tactical_game tg;
  tg.base = g;
  detail::loop_overrides ovr;
  ovr.phi0 = phi_start;
  ovr.t0 = t_start;
  ovr.hidden.mode = detail::hidden_override::kind::constants;
  ovr.hidden.constants = eps_assumed;
  run_options ro = opts;
  ro.horizon = horizon;
  return detail::run_windowed(tg, ro, ovr).traj;
}

namespace {

window_prediction predict_one_window(const game& g, const trajectory& actual,
                                     const transcript_window& w, const vec& eps,
                                     const run_options& opts) {
  window_prediction wp;
  wp.k_begin = w.k_begin;
  wp.k_end = w.k_end;
  const vec& phi_start = actual.phi[static_cast<std::size_t>(w.k_begin)];
  double t_start = actual.times[static_cast<std::size_t>(w.k_begin)];
  if (w.k_end == w.k_begin) {
    // Single-node window: nothing to integrate.
    wp.predicted.t0 = t_start;
    wp.predicted.h = actual.h;
    wp.predicted.times.push_back(t_start);
    wp.predicted.phi.push_back(phi_start);
    return wp;
  }
  double horizon = static_cast<double>(w.k_end - w.k_begin) * actual.h;
  run_options ro = opts;
  ro.step = actual.h;
  wp.predicted = predict_trajectory(g, phi_start, t_start, horizon, eps, ro);
  for (long j = 0; j < wp.predicted.nodes(); ++j) {
    const vec& a = actual.phi[static_cast<std::size_t>(w.k_begin + j)];
    const vec& p = wp.predicted.phi[static_cast<std::size_t>(j)];
    wp.max_state_error = std::max(wp.max_state_error, (a - p).cwiseAbs().maxCoeff());
  }
  return wp;
}

}  // namespace

std::vector<window_prediction> short_term_predict(const game& g, const trajectory& actual,
                                                  const dialogue_transcript& transcript,
                                                  const vec& assumed, const run_options& opts) {
  if (assumed.size() != g.hidden_total())
    throw contract_error("prediction: assumed hidden parameters have wrong dimension");
  std::vector<window_prediction> out;
  out.reserve(transcript.windows.size());
  for (const auto& w : transcript.windows)
    out.push_back(predict_one_window(g, actual, w, assumed, opts));
  return out;
}

std::vector<window_prediction> corrected_predict(const game& g, const trajectory& actual,
                                                 const dialogue_transcript& transcript,
                                                 const vec& assumed, const run_options& opts) {
  if (assumed.size() != g.hidden_total())
    throw contract_error("prediction: assumed hidden parameters have wrong dimension");
  std::vector<window_prediction> out;
  out.reserve(transcript.windows.size());
  for (std::size_t n = 0; n < transcript.windows.size(); ++n) {
    vec eps = assumed;
    if (n > 0) {
      const transcript_window& prev = transcript.windows[n - 1];
      if (prev.k_end > prev.k_begin) {
        // The correction: hidden parameters estimated on the adjacent
        // preceding window stand in for the assumption.
        for (int i = 0; i < g.player_count(); ++i) {
          epsilon_estimate est = estimate_epsilon(g, actual, i, prev.k_begin, prev.k_end);
          int off = g.hidden_offset(i);
          for (long j = 0; j < est.value.size(); ++j) eps[off + j] = est.value[j];
        }
      }
    }
    out.push_back(predict_one_window(g, actual, transcript.windows[n], eps, opts));
  }
  return out;
}

tactical_trace strategic_forecast(const tactical_game& spec,
                                  const std::vector<expr>& virtual_strategies,
                                  const run_options& opts) {
  if (static_cast<int>(virtual_strategies.size()) != spec.base.hidden_total())
    throw contract_error("forecast: need one virtual strategy per hidden component");
  for (const auto& e : virtual_strategies)
    if (e.empty()) throw contract_error("forecast: virtual strategy expression is empty");
  detail::loop_overrides ovr;
  ovr.hidden.mode = detail::hidden_override::kind::strategies;
  ovr.hidden.strategies = virtual_strategies;
  return detail::run_windowed(spec, opts, ovr);
}

combined_forecast combined_layer(const tactical_game& spec, const trajectory& actual,
                                 const dialogue_transcript& transcript, const vec& assumed,
                                 const std::vector<expr>& virtual_strategies,
                                 double total_horizon, const run_options& opts) {
  combined_forecast out;
  out.windows = short_term_predict(spec.base, actual, transcript, assumed, opts);

  double observed = actual.times.back() - actual.t0;
  if (!(total_horizon > observed))
    throw contract_error("forecast: total horizon must extend past the observed span");
  if (static_cast<int>(virtual_strategies.size()) != spec.base.hidden_total())
    throw contract_error("forecast: need one virtual strategy per hidden component");
  for (const auto& e : virtual_strategies)
    if (e.empty()) throw contract_error("forecast: virtual strategy expression is empty");

  detail::loop_overrides ovr;
  ovr.phi0 = actual.phi.back();
  ovr.t0 = actual.times.back();
  ovr.hidden.mode = detail::hidden_override::kind::strategies;
  ovr.hidden.strategies = virtual_strategies;
  run_options ro = opts;
  ro.step = actual.h;
  ro.horizon = total_horizon - observed;
  out.continuation = detail::run_windowed(spec, ro, ovr);
  return out;
}

}  // namespace tactica
