#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tactica/expr.hpp"

namespace tactica {

using vec = Eigen::VectorXd;

/// Continuous state of a game at a moment in time.
struct game_state {
  vec phi;
  double t = 0.0;
};

/// What a player's strategy is allowed to observe. Hidden feedback
/// parameters are deliberately absent from this view; opacity is enforced
/// by this interface, not by convention.
struct player_view {
  double t;
  const vec& phi;
  const vec& lambda;  // slow-control schedule values
  const vec& theta;   // current comment (zero-order hold)
  const vec& omega;   // last closed window value; readable only when the
                      // scenario declares omega visible
};

/// Strategy supplied as native code; used mainly by tests that probe the
/// visibility boundary.
using native_control = std::function<double(const player_view&)>;

/// One player's declared pure control: a bounded scalar signal chosen
/// without access to hidden feedback parameters.
struct pure_control_signal {
  std::variant<expr, native_control> strategy;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

/// How a player's realized control forms from the pure control: an explicit
/// coupling (known to everyone) driven by hidden parameters produced
/// engine-side by a map the players never see.
///
/// The coupling reads (own pure control, state, own hidden parameters, and
/// bound comment/schedule values when the feedback binding is "known").
/// Each hidden component map reads (own pure control, state, time, a seeded
/// noise channel, and bound values when the binding is "unknown").
struct feedback_law {
  expr coupling;
  std::vector<expr> hidden;  // one expression per hidden component
  int hidden_dim() const { return static_cast<int>(hidden.size()); }
};

/// A coalition: the subset of players whose pure controls aggregate into one
/// control channel of the evolution field. Overlapping memberships are
/// allowed. The default aggregator applies each member's coupling and sums.
struct coalition {
  std::vector<int> members;          // player indices, 0-based
  expr aggregator;                   // empty = couple-then-sum
};

struct coalition_map {
  std::vector<coalition> groups;
};

/// Time-independent functional checked along a trajectory; drift beyond the
/// tolerance means the claimed invariant does not hold for the run.
struct invariant_functional {
  std::string name;
  expr value;  // over t, state, pure/realized controls, hidden parameters
  double tolerance = 1e-9;
};

struct invariant_report {
  std::string name;
  double drift = 0.0;
  double tolerance = 0.0;
  bool within = true;
};

/// Sampled run on a uniform time grid. All per-node records have N+1 rows.
struct trajectory {
  double t0 = 0.0;
  double h = 0.0;
  std::vector<double> times;
  std::vector<vec> phi;
  std::vector<vec> pure;     // per node: one scalar per player
  std::vector<vec> realized; // per node: one scalar per player
  std::vector<vec> hidden;   // per node: stacked hidden components
  std::vector<int> cell;     // per node: cell index, -1 when no complex
  long nodes() const { return static_cast<long>(times.size()); }
};

enum class binding_mode { none, known, unknown };

/// Which held window streams may enter the evolution field.
struct evolution_binding {
  bool theta = false;
  bool omega = false;
};

/// Routing of comments and the slow-control schedule into the game:
/// evolution side (explicit by nature) and feedback side, where "known"
/// means visible in the coupling and "unknown" means folded into the hidden
/// maps.
struct parametric_binding {
  evolution_binding evolution;
  binding_mode feedback = binding_mode::none;
  binding_mode lambda_feedback = binding_mode::none;
};

/// A complete continuous-layer game: state dynamics, players, couplings,
/// optional coalitions, plus the declared bindings. Immutable during runs;
/// concurrent runs over one game are safe.
struct game {
  int state_dim = 0;
  std::vector<expr> dynamics;            // one per state component
  std::vector<pure_control_signal> controls;
  std::vector<feedback_law> feedbacks;
  std::optional<coalition_map> coalitions;
  std::vector<expr> lambda_schedule;     // slow controls as functions of t
  parametric_binding binding;
  std::vector<invariant_functional> invariants;

  vec phi0;
  double t0 = 0.0;
  double h = 1e-3;
  double horizon = 1.0;
  std::uint64_t seed = 0;

  int player_count() const { return static_cast<int>(controls.size()); }
  int hidden_total() const {
    int d = 0;
    for (const auto& f : feedbacks) d += f.hidden_dim();
    return d;
  }
  /// Offset of player i's hidden components in the stacked vector.
  int hidden_offset(int i) const {
    int d = 0;
    for (int j = 0; j < i; ++j) d += feedbacks[static_cast<std::size_t>(j)].hidden_dim();
    return d;
  }
  /// Number of control channels the evolution field reads (coalitions or players).
  int field_channels() const {
    return coalitions ? static_cast<int>(coalitions->groups.size()) : player_count();
  }
};

/// Realized control of one player: coupling applied to (pure control, state,
/// hidden parameters) with bound values fixed. Validates dimensions and
/// names the offending argument on mismatch.
double eval_control(const game& g, int player, double pure, const vec& phi, const vec& hidden,
                    const vec& theta = vec(), const vec& lambda = vec());

/// Coalition channel values for given per-player pure controls and hidden
/// parameters. Empty aggregator couples each member and sums.
vec aggregate_coalition(const game& g, const vec& pure, const vec& phi, const vec& hidden_stacked,
                        const vec& theta = vec(), const vec& lambda = vec());

/// One classical Runge-Kutta step of the evolution field with the control
/// channels held constant. Exposed for callers that genuinely have constant
/// controls; full runs use the sample-and-hold convention described at
/// simulate().
game_state step(const game& g, const game_state& s, const vec& channels, double h,
                const vec& theta = vec(), const vec& omega = vec());

/// Options shared by all run entry points.
struct run_options {
  std::optional<std::uint64_t> seed;    // overrides game.seed
  std::optional<double> step;           // overrides game.h
  std::optional<double> horizon;        // overrides game.horizon
};

/// Integrates the game over [t0, t0 + N h].
///
/// Per node: pure controls are evaluated first (visible context only), then
/// hidden parameters (seeded noise channel per player), then realized
/// controls. Within a step the exogenous inputs (pure controls, hidden
/// parameters, schedule values) stay frozen at their node values while the
/// couplings and the field re-evaluate at each integrator stage, so smooth
/// feedback is integrated at full fourth order.
///
/// Throws numeric_error with node context when the state or a control goes
/// non-finite, and contract_error when a pure control leaves its bounds.
trajectory simulate(const game& g, const run_options& opts = {});

/// Max drift of each declared invariant functional along the trajectory.
std::vector<invariant_report> check_invariant_functionals(const game& g, const trajectory& tr);

/// Grid length: number of steps covering the horizon. Validates that the
/// horizon is an integral number of steps.
long step_count(double t0, double horizon, double h);

}  // namespace tactica
