#pragma once

// Internal machinery shared by every run entry point. One loop implementation
// serves plain simulation (no windows), fixed partitions, transition-driven
// windows, rule-driven sets, and the multi-system bundle loop, so reduction
// claims (frozen comments equal plain runs, diagonal bundles equal
// independent runs) hold bit-exactly by construction.

#include <optional>

#include "tactica/layouts.hpp"
#include "tactica/rng.hpp"
#include "tactica/tactics.hpp"

namespace tactica::detail {

/// Replaces the engine-side hidden maps for prediction-style runs. The
/// override path never evaluates the game's hidden expressions and never
/// draws from the noise channel.
struct hidden_override {
  enum class kind { none, constants, strategies };
  kind mode = kind::none;
  vec constants;              // stacked hidden components
  std::vector<expr> strategies;  // stacked, over (t, state)
};

struct loop_overrides {
  std::optional<vec> phi0;
  std::optional<double> t0;
  hidden_override hidden;
  bool freeze_comments = false;
};

/// Per-system compiled workspace and mutable run state.
struct sys_ctx {
  const tactical_game* spec = nullptr;
  const game* g = nullptr;

  // Dimensions and binding switches, resolved once.
  int d = 0, m = 0, channels = 0, D = 0, K = 0, M = 0, V = 0, L = 0;
  bool bind_theta = false, bind_omega = false;
  bool fb_known = false, fb_unknown = false;
  bool lam_known = false, lam_unknown = false;

  double t0 = 0.0, h = 0.0;
  long N = 0;

  // Mutable run state.
  vec phi;
  vec theta, omega_held;
  vec lambda_now;
  vec u0_now, u_now, eps_now, channels_now;
  std::vector<splitmix64> noise;

  // Slot buffers, laid out per layouts.hpp.
  std::vector<double> dyn_slots, ctl_slots, agg_slots, cell_slots, term_slots;
  std::vector<std::vector<double>> cpl_slots, hid_slots;

  // Stage scratch for advance(); holds no state across calls.
  vec stage_u, stage_ch;
  vec omega_stub;  // what strategies see in place of omega when it is not visible

  // Window bookkeeping.
  long win_start = 0;
  int prev_label = -1;
  vec set_start_omega;
  std::vector<long> fixed_nodes;
  std::size_t next_fixed = 0;
  long guard_steps = 0;

  hidden_override hov;
  bool freeze_comments = false;

  // Outputs.
  trajectory traj;
  dialogue_transcript transcript;
  std::vector<vec> comment_seq;
  std::vector<set_flags> flags;
};

/// Validates the spec, resolves dimensions, and prepares the workspace.
void init_sys(sys_ctx& c, const tactical_game& spec, std::uint64_t seed, double h,
              double horizon, const loop_overrides& ovr);

/// Evaluates pure controls, hidden components, and realized controls at node
/// k with the current held values, checks bounds and finiteness, and records
/// the node (including its cell label when a complex is attached).
void eval_node(sys_ctx& c, long k);

/// Advances phi from node k to k+1: exogenous inputs stay frozen at their
/// node values while couplings and the field re-evaluate per stage.
void advance(sys_ctx& c, long k);

/// True when the window that started at win_start closes at node k, per the
/// system's own schedule. Only meaningful for single-system runs; bundles
/// drive closures themselves.
bool closure_at(sys_ctx& c, long k, set_flags& fl);

/// Reduces the window functionals over nodes [kb, ke].
transcript_window eval_window(sys_ctx& c, long kb, long ke);

/// Records a closed window, updates held omega and set bookkeeping, and
/// opens the next window at `next_start`.
void commit_window(sys_ctx& c, transcript_window w, double boundary_t, long next_start,
                   set_flags fl);

/// The system's own comment update for a just-closed window (identity when
/// comments are absent or frozen).
vec own_theta_next(sys_ctx& c, const transcript_window& w, int window_index);

void commit_theta(sys_ctx& c, vec theta);

/// Raw cell match with exact-cover validation, then hysteresis stickiness
/// against prev (-1 = first sample).
int sticky_label(const cell_complex& complex, double hysteresis,
                 std::span<const double> eps_slots, int prev, double t);

/// Classical fourth-order step of y' = f(t, y). The arithmetic shape is
/// fixed; reference reimplementations in tests mirror it literally.
template <class F>
vec rk4_step(double t, const vec& y, double h, F&& f) {
  vec k1 = f(t, y);
  vec k2 = f(t + h / 2, y + (h / 2) * k1);
  vec k3 = f(t + h / 2, y + (h / 2) * k2);
  vec k4 = f(t + h, y + h * k3);
  return y + (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Single-system unified loop.
tactical_trace run_windowed(const tactical_game& spec, const run_options& opts,
                            const loop_overrides& ovr = {});

/// Field evaluation with constant channel values (public step()).
vec eval_field_const(const game& g, double t, const vec& phi, const vec& channels,
                     const vec& theta, const vec& omega, const vec& lambda);

/// Layout dimensions of a full windowed specification.
layout_dims dims_of(const tactical_game& spec);

/// Boundary nodes of a fixed partition on the (t0, h) grid with N steps.
/// Shared by single-system runs and the bundle loop so both place windows
/// on identical nodes.
std::vector<long> fixed_boundary_nodes(const fixed_partition& p, double t0, double h,
                                       double horizon, long N);

}  // namespace tactica::detail
