#pragma once

#include "tactica/tactics.hpp"

namespace tactica {

/// Hidden-parameter estimate for one player over one window, recovered from
/// the observed (pure control, state, realized control) samples alone. The
/// estimator probes the declared coupling numerically and never touches the
/// hidden maps.
struct epsilon_estimate {
  vec value;                 // one entry per hidden component of the player
  double residual = 0.0;     // max |coupling(eps_hat) - observed u| over the window
  bool identifiable = true;  // regressor had full rank
  bool linear = true;        // coupling responded linearly to the probes
};

/// Least-squares estimate over trajectory nodes [k_begin, k_end]. `theta`
/// supplies the bound comment values when the feedback binding is known
/// (held constant over the window, the zero-order-hold convention).
epsilon_estimate estimate_epsilon(const game& g, const trajectory& tr, int player,
                                  long k_begin, long k_end, const vec& theta = vec());

/// Stacked per-window estimates (all players) over a transcript's windows.
std::vector<epsilon_estimate> estimate_epsilon_by_window(const game& g, const trajectory& tr,
                                                         const dialogue_transcript& transcript,
                                                         int player, const vec& theta = vec());

/// Integrates the game forward from (t_start, phi_start) over `horizon`
/// with the hidden maps replaced by the given constants. Same integrator
/// and conventions as a live run; the hidden maps are never evaluated.
trajectory predict_trajectory(const game& g, const vec& phi_start, double t_start,
                              double horizon, const vec& eps_assumed,
                              const run_options& opts = {});

/// One window of a stitched forecast: the prediction restarted from the
/// observed state at the window's first node.
struct window_prediction {
  long k_begin = 0;
  long k_end = 0;
  trajectory predicted;
  double max_state_error = 0.0;  // max over the window's nodes vs the actual run
};

/// Short-term layer: per window, re-integrate from the observed window
/// start under one assumed stacked epsilon. `assumed` is used as-is for
/// every window (the baseline predictor).
std::vector<window_prediction> short_term_predict(const game& g, const trajectory& actual,
                                                  const dialogue_transcript& transcript,
                                                  const vec& assumed,
                                                  const run_options& opts = {});

/// Corrected layer: window n is re-predicted with the epsilon estimated on
/// the adjacent preceding window n-1; window 0 falls back to `assumed`.
/// Estimation uses the declared couplings on observed data only.
std::vector<window_prediction> corrected_predict(const game& g, const trajectory& actual,
                                                 const dialogue_transcript& transcript,
                                                 const vec& assumed,
                                                 const run_options& opts = {});

/// Associated-game forecast: every hidden component is driven by a declared
/// virtual strategy over (t, state), doubling the controlled channels (n
/// pure strategies + n virtual ones). Runs the full windowed game under
/// that substitution.
tactical_trace strategic_forecast(const tactical_game& spec,
                                  const std::vector<expr>& virtual_strategies,
                                  const run_options& opts = {});

/// Short-term layer stitched over the observed span, plus the long
/// continuation from the final observed state to `total_horizon` under the
/// virtual strategies.
struct combined_forecast {
  std::vector<window_prediction> windows;
  tactical_trace continuation;
};

combined_forecast combined_layer(const tactical_game& spec, const trajectory& actual,
                                 const dialogue_transcript& transcript, const vec& assumed,
                                 const std::vector<expr>& virtual_strategies,
                                 double total_horizon, const run_options& opts = {});

}  // namespace tactica
