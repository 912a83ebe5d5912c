#pragma once

#include <vector>

#include "tactica/engine.hpp"

namespace tactica {

/// Reduction applied to a pointwise expression over a window of the run.
enum class window_reduction { mean, integral, last };

/// One component of a window functional: reduce `value` over the window's
/// grid nodes. Integrals use the trapezoid rule on the trajectory grid;
/// means divide by the window span; `last` takes the final node's value.
/// A single-node window has integral 0 and mean/last equal to its value.
struct window_functional {
  window_reduction reduction = window_reduction::mean;
  expr value;
};

/// Which continuous stream state-side functionals read. The state vector of
/// a run serves as either; the declaration only switches the variable
/// spelling (phi*/xi*) and documents intent.
enum class stream_source { state, intention };

/// Window functional declarations of a run: state-side components (omega),
/// control-side components (v), and optional declared state summaries used
/// by recurrence fitting.
struct window_functionals {
  std::vector<window_functional> omega;
  std::vector<window_functional> v;
  std::vector<window_functional> summaries;
  vec omega_init;  // held value before the first window closes
  stream_source source = stream_source::state;

  int omega_dim() const { return static_cast<int>(omega.size()); }
  int v_dim() const { return static_cast<int>(v.size()); }
  int summary_dim() const { return static_cast<int>(summaries.size()); }
};

/// One closed window: the sampled node range used for quadrature and the
/// reduced values.
struct transcript_window {
  long k_begin = 0;
  long k_end = 0;      // inclusive
  double t_begin = 0.0;
  double t_end = 0.0;
  vec omega;
  vec v;
  vec summary;
};

/// Sequence of windows tiling the run. `boundaries` is the formal partition
/// t_0 < t_1 < ... < T; for transition-segmented runs the node at an
/// interior boundary belongs to the window it opens, so a window's sampled
/// range may end one node before its formal boundary.
struct dialogue_transcript {
  std::vector<double> boundaries;
  std::vector<transcript_window> windows;
  int length() const { return static_cast<int>(windows.size()); }
};

/// Continuous intention layer of a dialogue: same structure as a game state
/// advance; one Runge-Kutta step with the control channels held constant.
game_state advance_intention(const game& g, const game_state& s, const vec& channels, double h);

/// Evaluates the given functionals over one node range [k_begin, k_end] of
/// a finished trajectory. Integral components are additive across a shared
/// interior node; windows must lie inside the trajectory.
transcript_window eval_window_functionals(const window_functionals& fs, const trajectory& tr,
                                          long k_begin, long k_end);

/// Fixed window partition for dialogue runs: either uniform window count or
/// explicit interior boundary times (each must land on a grid node).
struct fixed_partition {
  int uniform_windows = 0;            // used when times is empty
  std::vector<double> times;          // interior boundaries, strictly increasing
};

/// A dialogue specification: continuous layer plus window functionals over
/// a fixed partition. (Transition-driven partitions belong to
/// verbalization; rule-driven partitions to perception.)
struct dialogue_spec {
  game base;
  fixed_partition partition;
  window_functionals functionals;
};

/// Runs the continuous layer and reduces every window. Boundaries coincide
/// with grid nodes exactly; windows share boundary nodes.
dialogue_transcript run_dialogue(const dialogue_spec& spec, const run_options& opts = {});

}  // namespace tactica
