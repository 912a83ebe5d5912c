#pragma once

#include <optional>

#include "tactica/verbalization.hpp"

namespace tactica {

/// Comment recurrence theta_n = Theta(theta_{n-1}, omega_n, v_n; p).
/// One expression per component; reads nothing but those inputs and the
/// declared family parameters.
struct comment_rule {
  std::vector<expr> update;
  vec init;
  int dim() const { return static_cast<int>(update.size()); }
};

/// Applies the rule for one closed window. Non-finite output raises
/// numeric_error naming the window.
vec update_comment(const comment_rule& rule, const vec& theta_prev, const vec& omega,
                   const vec& v, const vec& params, int window_index);

/// Termination rule for perception-style windows: the current set finishes
/// at the first grid time where the predicate over (t, current state,
/// window value at set start) holds, or after `guard` time units.
struct set_termination_rule {
  predicate rule;
  double guard = std::numeric_limits<double>::infinity();
};

/// How a run is partitioned into windows.
struct window_schedule {
  enum class kind { none, cells, fixed, sets };
  kind mode = kind::none;
  std::optional<cell_complex> complex;  // cells
  double hysteresis = 0.0;              // cells
  fixed_partition partition;            // fixed
  std::optional<set_termination_rule> termination;  // sets
};

/// Full specification of a windowed run: continuous game, schedule, window
/// functionals, and an optional comment rule whose output is bound back
/// into the game as declared by base.binding.
struct tactical_game {
  game base;
  window_schedule schedule;
  window_functionals functionals;
  std::optional<comment_rule> comments;
  vec params;           // family parameter values visible to the rule
  bool omega_visible = false;
  std::string state_name = "phi";
};

/// Flags attached to rule-driven windows.
struct set_flags {
  bool guard_expired = false;  // closed by the max-duration guard
  bool truncated = false;      // run ended before the rule fired
};

/// Everything a windowed run produces: the trajectory, the transcript, and
/// the comment sequence theta_0..theta_W. Tactical actions of window n are
/// the pair (v_n, theta_n).
struct tactical_trace {
  trajectory traj;
  dialogue_transcript transcript;
  std::vector<vec> comments;       // length transcript.length() + 1
  std::vector<set_flags> flags;    // sets mode: one per window
};

/// Evaluation views of the game with comment and window values fixed, as
/// used on the segment that follows a window closure.
struct bound_game {
  const game* base = nullptr;
  vec theta;
  vec omega;

  /// Field value at (t, phi) with the bound values and given frozen inputs.
  vec field(double t, const vec& phi, const vec& channels, const vec& lambda) const;
  /// Realized control of one player under the bound values.
  double coupling(int player, double pure, const vec& phi, const vec& hidden,
                  const vec& lambda) const;
};

/// Captures theta (and omega) into evaluation views. Validation of which
/// expressions may read the bound streams happens at game construction.
bound_game bind_parameters(const game& g, const vec& theta, const vec& omega = vec());

/// Runs the game with windows closing per the schedule and comments updated
/// after each closure.
///
/// Ordering at a closure node t_n: the node's recorded controls and hidden
/// parameters use the pre-update comment; theta_n then takes effect for the
/// integration step departing t_n and everything after. Perturbing theta_n
/// therefore cannot change any recorded value at or before t_n.
tactical_trace run_tactical(const tactical_game& spec, const run_options& opts = {});

}  // namespace tactica
