#include "runloop.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "tactica/errors.hpp"

namespace tactica::detail {
namespace {

std::string fmt_t(double t) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", t);
  return buf;
}

std::string fmt_v(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void bad_spec(const std::string& what) { throw contract_error("run: " + what); }

// Grid node for a time that must coincide with one; relative 1e-9 slack.
long grid_node(double t, double t0, double h, double horizon, const char* what) {
  double x = (t - t0) / h;
  long node = std::llround(x);
  double back = t0 + static_cast<double>(node) * h;
  if (std::abs(back - t) > 1e-9 * std::max(1.0, std::abs(t)))
    throw contract_error(std::string("run: ") + what + " " + fmt_t(t) +
                         " does not land on the step grid");
  long n = std::llround(horizon / h);
  if (node <= 0 || node >= n)
    throw contract_error(std::string("run: ") + what + " " + fmt_t(t) +
                         " must lie strictly inside the run");
  return node;
}

}  // namespace

std::vector<long> fixed_boundary_nodes(const fixed_partition& p, double t0, double h,
                                       double horizon, long N) {
  std::vector<long> nodes;
  if (!p.times.empty()) {
    long prev = 0;
    for (double tb : p.times) {
      long node = grid_node(tb, t0, h, horizon, "window boundary");
      if (node <= prev) bad_spec("window boundaries must be strictly increasing");
      nodes.push_back(node);
      prev = node;
    }
  } else {
    int w = p.uniform_windows;
    if (w < 1) bad_spec("window count must be at least 1");
    if (w > N) bad_spec("more windows than integration steps");
    for (int j = 1; j < w; ++j)
      nodes.push_back(std::llround(static_cast<double>(j) * static_cast<double>(N) / w));
  }
  return nodes;
}

layout_dims dims_of(const tactical_game& spec) {
  layout_dims ld;
  ld.state_dim = spec.base.state_dim;
  ld.players = spec.base.player_count();
  ld.channels = spec.base.field_channels();
  ld.hidden_total = spec.base.hidden_total();
  ld.theta_dim = spec.comments ? spec.comments->dim() : 0;
  ld.omega_dim = spec.functionals.omega_dim();
  ld.v_dim = spec.functionals.v_dim();
  ld.lambda_dim = static_cast<int>(spec.base.lambda_schedule.size());
  ld.param_dim = static_cast<int>(spec.params.size());
  ld.summary_dim = spec.functionals.summary_dim();
  ld.state_name = spec.state_name;
  return ld;
}

void init_sys(sys_ctx& c, const tactical_game& spec, std::uint64_t seed, double h,
              double horizon, const loop_overrides& ovr) {
  const game& g = spec.base;
  c.spec = &spec;
  c.g = &g;

  c.d = g.state_dim;
  c.m = g.player_count();
  c.channels = g.field_channels();
  c.D = g.hidden_total();
  c.K = spec.comments ? spec.comments->dim() : 0;
  c.M = spec.functionals.omega_dim();
  c.V = spec.functionals.v_dim();
  c.L = static_cast<int>(g.lambda_schedule.size());
  c.bind_theta = g.binding.evolution.theta;
  c.bind_omega = g.binding.evolution.omega;
  c.fb_known = g.binding.feedback == binding_mode::known;
  c.fb_unknown = g.binding.feedback == binding_mode::unknown;
  c.lam_known = g.binding.lambda_feedback == binding_mode::known;
  c.lam_unknown = g.binding.lambda_feedback == binding_mode::unknown;

  if (c.d < 1) bad_spec("state dimension must be at least 1");
  if (static_cast<int>(g.dynamics.size()) != c.d)
    bad_spec("dynamics must have one expression per state component");
  for (const auto& e : g.dynamics)
    if (e.empty()) bad_spec("dynamics expression is empty");
  if (c.m < 1) bad_spec("at least one player is required");
  if (static_cast<int>(g.feedbacks.size()) != c.m)
    bad_spec("feedback laws must have one entry per player");
  for (int i = 0; i < c.m; ++i) {
    const auto& ctl = g.controls[static_cast<std::size_t>(i)];
    if (const expr* e = std::get_if<expr>(&ctl.strategy); e && e->empty())
      bad_spec("player " + std::to_string(i + 1) + " has an empty strategy");
    if (!(ctl.lower <= ctl.upper))
      bad_spec("player " + std::to_string(i + 1) + " has an empty control range");
    if (g.feedbacks[static_cast<std::size_t>(i)].coupling.empty())
      bad_spec("player " + std::to_string(i + 1) + " has an empty coupling");
  }
  if (g.coalitions) {
    if (g.coalitions->groups.empty()) bad_spec("coalition map has no coalitions");
    for (const auto& grp : g.coalitions->groups) {
      if (grp.members.empty()) bad_spec("a coalition has no members");
      for (int i : grp.members)
        if (i < 0 || i >= c.m) bad_spec("coalition member index out of range");
    }
  }

  c.t0 = ovr.t0.value_or(g.t0);
  c.h = h;
  if (!(h > 0.0)) bad_spec("step must be positive");
  c.N = step_count(c.t0, horizon, h);

  c.phi = ovr.phi0 ? *ovr.phi0 : g.phi0;
  if (c.phi.size() != c.d) bad_spec("initial state has wrong dimension");

  if (spec.comments) {
    if (spec.comments->init.size() != c.K) bad_spec("comment initial value has wrong dimension");
    for (const auto& e : spec.comments->update)
      if (e.empty()) bad_spec("comment update expression is empty");
    c.theta = spec.comments->init;
  } else {
    c.theta = vec(0);
    if (c.bind_theta || c.fb_known || c.fb_unknown)
      bad_spec("comment binding declared but no comment rule present");
  }
  c.omega_held = spec.functionals.omega_init.size() == 0 ? vec(vec::Zero(c.M))
                                                         : spec.functionals.omega_init;
  if (c.omega_held.size() != c.M) bad_spec("held window value has wrong dimension");
  c.set_start_omega = c.omega_held;
  c.omega_stub = vec::Zero(c.M);

  c.lambda_now = vec::Zero(c.L);
  c.u0_now = vec::Zero(c.m);
  c.u_now = vec::Zero(c.m);
  c.eps_now = vec::Zero(c.D);
  c.channels_now = vec::Zero(c.channels);
  c.stage_u = vec::Zero(c.m);
  c.stage_ch = vec::Zero(c.channels);

  splitmix64 root(seed);
  c.noise.clear();
  for (int i = 0; i < c.m; ++i) c.noise.push_back(root.split(static_cast<std::uint64_t>(i)));

  c.dyn_slots.assign(static_cast<std::size_t>(1 + c.d + c.channels + c.L +
                                              (c.bind_theta ? c.K : 0) +
                                              (c.bind_omega ? c.M : 0)),
                     0.0);
  c.ctl_slots.assign(static_cast<std::size_t>(1 + c.d + c.L + c.K +
                                              (spec.omega_visible ? c.M : 0)),
                     0.0);
  c.agg_slots.assign(static_cast<std::size_t>(c.m + c.d + c.D), 0.0);
  c.cell_slots.assign(static_cast<std::size_t>(c.D), 0.0);
  c.term_slots.assign(static_cast<std::size_t>(1 + c.d + c.M), 0.0);
  c.cpl_slots.clear();
  c.hid_slots.clear();
  for (int i = 0; i < c.m; ++i) {
    int di = g.feedbacks[static_cast<std::size_t>(i)].hidden_dim();
    c.cpl_slots.emplace_back(static_cast<std::size_t>(1 + c.d + di + (c.fb_known ? c.K : 0) +
                                                      (c.lam_known ? c.L : 0)),
                             0.0);
    c.hid_slots.emplace_back(static_cast<std::size_t>(1 + c.d + 2 + (c.fb_unknown ? c.K : 0) +
                                                      (c.lam_unknown ? c.L : 0)),
                             0.0);
  }

  const window_schedule& sch = spec.schedule;
  c.win_start = 0;
  c.prev_label = -1;
  c.next_fixed = 0;
  c.fixed_nodes.clear();
  c.guard_steps = c.N + 1;
  switch (sch.mode) {
    case window_schedule::kind::none:
      break;
    case window_schedule::kind::cells: {
      if (!sch.complex) bad_spec("transition windows need a cell complex");
      if (sch.complex->cells.empty()) bad_spec("cell complex has no cells");
      if (c.D < 1) bad_spec("transition windows need at least one hidden component");
      if (sch.complex->ambient_dim != c.D)
        bad_spec("cell complex dimension does not match the stacked hidden dimension");
      if (sch.hysteresis < 0.0) bad_spec("hysteresis must be nonnegative");
      break;
    }
    case window_schedule::kind::fixed:
      c.fixed_nodes = fixed_boundary_nodes(sch.partition, c.t0, c.h, horizon, c.N);
      break;
    case window_schedule::kind::sets: {
      if (!sch.termination) bad_spec("rule-driven windows need a termination rule");
      if (sch.termination->rule.empty()) bad_spec("set termination rule is empty");
      double guard = sch.termination->guard;
      if (!(guard > 0.0)) bad_spec("set guard must be positive");
      if (std::isfinite(guard)) {
        c.guard_steps = static_cast<long>(std::ceil(guard / c.h - 1e-9));
        if (c.guard_steps < 1) c.guard_steps = 1;
      }
      break;
    }
  }

  c.hov = ovr.hidden;
  c.freeze_comments = ovr.freeze_comments;
  if (c.hov.mode == hidden_override::kind::constants && c.hov.constants.size() != c.D)
    bad_spec("hidden override constants have wrong dimension");
  if (c.hov.mode == hidden_override::kind::strategies &&
      static_cast<int>(c.hov.strategies.size()) != c.D)
    bad_spec("hidden override strategies have wrong dimension");

  c.traj = trajectory{};
  c.traj.t0 = c.t0;
  c.traj.h = c.h;
  c.traj.times.reserve(static_cast<std::size_t>(c.N + 1));
  c.traj.phi.reserve(static_cast<std::size_t>(c.N + 1));
  c.traj.pure.reserve(static_cast<std::size_t>(c.N + 1));
  c.traj.realized.reserve(static_cast<std::size_t>(c.N + 1));
  c.traj.hidden.reserve(static_cast<std::size_t>(c.N + 1));
  c.traj.cell.reserve(static_cast<std::size_t>(c.N + 1));
  c.transcript = dialogue_transcript{};
  c.comment_seq.clear();
  c.flags.clear();
}

namespace {

// Fills lambda_now from the schedule at time t (one slot: t).
void eval_lambda(sys_ctx& c, double t) {
  double slot[1] = {t};
  for (int l = 0; l < c.L; ++l) {
    double v = c.g->lambda_schedule[static_cast<std::size_t>(l)].eval(slot);
    if (!std::isfinite(v))
      throw numeric_error("schedule component " + std::to_string(l + 1) +
                          " is non-finite at t = " + fmt_t(t));
    c.lambda_now[l] = v;
  }
}

// Realized control of player i at state ph with the frozen node inputs.
double realized_control(sys_ctx& c, int i, const vec& ph) {
  auto& s = c.cpl_slots[static_cast<std::size_t>(i)];
  const feedback_law& fb = c.g->feedbacks[static_cast<std::size_t>(i)];
  int di = fb.hidden_dim();
  int off = c.g->hidden_offset(i);
  std::size_t p = 0;
  s[p++] = c.u0_now[i];
  for (int j = 0; j < c.d; ++j) s[p++] = ph[j];
  for (int j = 0; j < di; ++j) s[p++] = c.eps_now[off + j];
  if (c.fb_known)
    for (int j = 0; j < c.K; ++j) s[p++] = c.theta[j];
  if (c.lam_known)
    for (int j = 0; j < c.L; ++j) s[p++] = c.lambda_now[j];
  return fb.coupling.eval(s);
}

// Channel values at state ph from the frozen node inputs; writes into `out`.
void channel_values(sys_ctx& c, const vec& ph, const vec& u_players, vec& out) {
  if (!c.g->coalitions) {
    out = u_players;
    return;
  }
  const auto& groups = c.g->coalitions->groups;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const coalition& grp = groups[gi];
    if (grp.aggregator.empty()) {
      double acc = 0.0;
      for (int i : grp.members) acc += u_players[i];
      out[static_cast<long>(gi)] = acc;
    } else {
      std::size_t p = 0;
      for (int j = 0; j < c.m; ++j) c.agg_slots[p++] = c.u0_now[j];
      for (int j = 0; j < c.d; ++j) c.agg_slots[p++] = ph[j];
      for (int j = 0; j < c.D; ++j) c.agg_slots[p++] = c.eps_now[j];
      out[static_cast<long>(gi)] = grp.aggregator.eval(c.agg_slots);
    }
  }
}

}  // namespace

int sticky_label(const cell_complex& complex, double hysteresis,
                 std::span<const double> eps_slots, int prev, double t) {
  int match = -1;
  for (std::size_t ci = 0; ci < complex.cells.size(); ++ci) {
    if (complex.cells[ci].membership.holds(eps_slots)) {
      if (match >= 0)
        throw validation_error("cells '" + complex.cells[static_cast<std::size_t>(match)].label +
                               "' and '" + complex.cells[ci].label +
                               "' both match the hidden parameters at t = " + fmt_t(t));
      match = static_cast<int>(ci);
    }
  }
  if (match < 0) {
    std::string vals;
    for (std::size_t j = 0; j < eps_slots.size(); ++j) {
      if (j) vals += ", ";
      vals += fmt_v(eps_slots[j]);
    }
    throw validation_error("no cell matches the hidden parameters (" + vals +
                           ") at t = " + fmt_t(t));
  }
  if (prev >= 0 && match != prev && hysteresis > 0.0) {
    // Sticky labels: keep the previous cell until the new one clears the
    // hysteresis width.
    double m = complex.cells[static_cast<std::size_t>(match)].membership.margin(eps_slots);
    if (m < hysteresis) return prev;
  }
  return match;
}

void eval_node(sys_ctx& c, long k) {
  const game& g = *c.g;
  double t = c.t0 + static_cast<double>(k) * c.h;
  eval_lambda(c, t);

  // Pure controls first: visible context only.
  const vec& omega_seen = c.spec->omega_visible ? c.omega_held : c.omega_stub;
  for (int i = 0; i < c.m; ++i) {
    const pure_control_signal& ctl = g.controls[static_cast<std::size_t>(i)];
    double u0;
    if (const expr* e = std::get_if<expr>(&ctl.strategy)) {
      std::size_t p = 0;
      c.ctl_slots[p++] = t;
      for (int j = 0; j < c.d; ++j) c.ctl_slots[p++] = c.phi[j];
      for (int j = 0; j < c.L; ++j) c.ctl_slots[p++] = c.lambda_now[j];
      for (int j = 0; j < c.K; ++j) c.ctl_slots[p++] = c.theta[j];
      if (c.spec->omega_visible)
        for (int j = 0; j < c.M; ++j) c.ctl_slots[p++] = c.omega_held[j];
      u0 = e->eval(c.ctl_slots);
    } else {
      player_view view{t, c.phi, c.lambda_now, c.theta, omega_seen};
      u0 = std::get<native_control>(ctl.strategy)(view);
    }
    if (!std::isfinite(u0))
      throw numeric_error("pure control of player " + std::to_string(i + 1) +
                          " is non-finite at t = " + fmt_t(t));
    if (u0 < ctl.lower || u0 > ctl.upper)
      throw contract_error("pure control of player " + std::to_string(i + 1) + " is " +
                           fmt_v(u0) + " at t = " + fmt_t(t) + ", outside [" + fmt_v(ctl.lower) +
                           ", " + fmt_v(ctl.upper) + "]");
    c.u0_now[i] = u0;
  }

  // Hidden components next; the per-player noise channel advances once per
  // component per node, in player order.
  switch (c.hov.mode) {
    case hidden_override::kind::constants:
      c.eps_now = c.hov.constants;
      break;
    case hidden_override::kind::strategies: {
      std::vector<double> vslots(static_cast<std::size_t>(1 + c.d));
      vslots[0] = t;
      for (int j = 0; j < c.d; ++j) vslots[static_cast<std::size_t>(1 + j)] = c.phi[j];
      for (int j = 0; j < c.D; ++j) {
        double v = c.hov.strategies[static_cast<std::size_t>(j)].eval(vslots);
        if (!std::isfinite(v))
          throw numeric_error("virtual hidden component " + std::to_string(j + 1) +
                              " is non-finite at t = " + fmt_t(t));
        c.eps_now[j] = v;
      }
      break;
    }
    case hidden_override::kind::none: {
      for (int i = 0; i < c.m; ++i) {
        const feedback_law& fb = g.feedbacks[static_cast<std::size_t>(i)];
        int off = g.hidden_offset(i);
        auto& s = c.hid_slots[static_cast<std::size_t>(i)];
        for (int cc = 0; cc < fb.hidden_dim(); ++cc) {
          double z = c.noise[static_cast<std::size_t>(i)].next_double();
          std::size_t p = 0;
          s[p++] = c.u0_now[i];
          for (int j = 0; j < c.d; ++j) s[p++] = c.phi[j];
          s[p++] = t;
          s[p++] = z;
          if (c.fb_unknown)
            for (int j = 0; j < c.K; ++j) s[p++] = c.theta[j];
          if (c.lam_unknown)
            for (int j = 0; j < c.L; ++j) s[p++] = c.lambda_now[j];
          double v = fb.hidden[static_cast<std::size_t>(cc)].eval(s);
          if (!std::isfinite(v))
            throw numeric_error("hidden component " + std::to_string(cc + 1) + " of player " +
                                std::to_string(i + 1) + " is non-finite at t = " + fmt_t(t));
          c.eps_now[off + cc] = v;
        }
      }
      break;
    }
  }

  // Realized controls and channels at the node state.
  for (int i = 0; i < c.m; ++i) {
    double u = realized_control(c, i, c.phi);
    if (!std::isfinite(u))
      throw numeric_error("realized control of player " + std::to_string(i + 1) +
                          " is non-finite at t = " + fmt_t(t));
    c.u_now[i] = u;
  }
  channel_values(c, c.phi, c.u_now, c.channels_now);
  for (long j = 0; j < c.channels_now.size(); ++j)
    if (!std::isfinite(c.channels_now[j]))
      throw numeric_error("control channel " + std::to_string(j + 1) +
                          " is non-finite at t = " + fmt_t(t));

  c.traj.times.push_back(t);
  c.traj.phi.push_back(c.phi);
  c.traj.pure.push_back(c.u0_now);
  c.traj.realized.push_back(c.u_now);
  c.traj.hidden.push_back(c.eps_now);

  if (c.spec->schedule.mode == window_schedule::kind::cells) {
    for (int j = 0; j < c.D; ++j) c.cell_slots[static_cast<std::size_t>(j)] = c.eps_now[j];
    int label =
        sticky_label(*c.spec->schedule.complex, c.spec->schedule.hysteresis, c.cell_slots,
                     c.prev_label, t);
    c.traj.cell.push_back(label);
    c.prev_label = label;
  } else {
    c.traj.cell.push_back(-1);
  }
}

void advance(sys_ctx& c, long k) {
  const game& g = *c.g;
  double t = c.t0 + static_cast<double>(k) * c.h;

  // Exogenous inputs (pure controls, hidden components, schedule values)
  // stay frozen at their node values; couplings and the field re-evaluate
  // at every stage with the stage state and stage time.
  auto field = [&](double ts, const vec& ph) -> vec {
    for (int i = 0; i < c.m; ++i) c.stage_u[i] = realized_control(c, i, ph);
    channel_values(c, ph, c.stage_u, c.stage_ch);
    std::size_t p = 0;
    c.dyn_slots[p++] = ts;
    for (int j = 0; j < c.d; ++j) c.dyn_slots[p++] = ph[j];
    for (int j = 0; j < c.channels; ++j) c.dyn_slots[p++] = c.stage_ch[j];
    for (int j = 0; j < c.L; ++j) c.dyn_slots[p++] = c.lambda_now[j];
    if (c.bind_theta)
      for (int j = 0; j < c.K; ++j) c.dyn_slots[p++] = c.theta[j];
    if (c.bind_omega)
      for (int j = 0; j < c.M; ++j) c.dyn_slots[p++] = c.omega_held[j];
    vec f(c.d);
    for (int j = 0; j < c.d; ++j) f[j] = g.dynamics[static_cast<std::size_t>(j)].eval(c.dyn_slots);
    return f;
  };

  c.phi = rk4_step(t, c.phi, c.h, field);
  if (!c.phi.allFinite())
    throw numeric_error("state became non-finite by t = " +
                        fmt_t(c.t0 + static_cast<double>(k + 1) * c.h));
}

bool closure_at(sys_ctx& c, long k, set_flags& fl) {
  switch (c.spec->schedule.mode) {
    case window_schedule::kind::none:
      return false;
    case window_schedule::kind::cells:
      // A transition at the final node has no window to open and is
      // absorbed into the last window.
      return k >= 1 && k < c.N &&
             c.traj.cell[static_cast<std::size_t>(k)] !=
                 c.traj.cell[static_cast<std::size_t>(k - 1)];
    case window_schedule::kind::fixed:
      if (c.next_fixed < c.fixed_nodes.size() && k == c.fixed_nodes[c.next_fixed]) {
        ++c.next_fixed;
        return true;
      }
      return false;
    case window_schedule::kind::sets: {
      if (k <= c.win_start) return false;
      std::size_t p = 0;
      c.term_slots[p++] = c.traj.times[static_cast<std::size_t>(k)];
      for (int j = 0; j < c.d; ++j) c.term_slots[p++] = c.phi[j];
      for (int j = 0; j < c.M; ++j) c.term_slots[p++] = c.set_start_omega[j];
      if (c.spec->schedule.termination->rule.holds(c.term_slots)) return true;
      if (k - c.win_start >= c.guard_steps) {
        fl.guard_expired = true;
        return true;
      }
      return false;
    }
  }
  return false;
}

transcript_window eval_window(sys_ctx& c, long kb, long ke) {
  return eval_window_functionals(c.spec->functionals, c.traj, kb, ke);
}

void commit_window(sys_ctx& c, transcript_window w, double boundary_t, long next_start,
                   set_flags fl) {
  c.omega_held = w.omega;
  c.transcript.windows.push_back(std::move(w));
  c.transcript.boundaries.push_back(boundary_t);
  if (c.spec->schedule.mode == window_schedule::kind::sets) c.flags.push_back(fl);
  c.set_start_omega = c.omega_held;
  c.win_start = next_start;
}

vec own_theta_next(sys_ctx& c, const transcript_window& w, int window_index) {
  if (!c.spec->comments || c.freeze_comments) return c.theta;
  return update_comment(*c.spec->comments, c.theta, w.omega, w.v, c.spec->params, window_index);
}

void commit_theta(sys_ctx& c, vec theta) {
  c.theta = std::move(theta);
  c.comment_seq.push_back(c.theta);
}

tactical_trace run_windowed(const tactical_game& spec, const run_options& opts,
                            const loop_overrides& ovr) {
  const game& g = spec.base;
  std::uint64_t seed = opts.seed.value_or(g.seed);
  double h = opts.step.value_or(g.h);
  double horizon = opts.horizon.value_or(g.horizon);

  sys_ctx c;
  init_sys(c, spec, seed, h, horizon, ovr);

  bool windowed = spec.schedule.mode != window_schedule::kind::none;
  if (windowed) c.transcript.boundaries.push_back(c.t0);
  c.comment_seq.push_back(c.theta);

  for (long k = 0; k <= c.N; ++k) {
    eval_node(c, k);
    set_flags fl{};
    if (closure_at(c, k, fl)) {
      // Transition windows are segment-pure: the node that triggered the
      // closure opens the next window. Fixed and rule-driven windows close
      // on their boundary node and share it with the next window.
      long ke = spec.schedule.mode == window_schedule::kind::cells ? k - 1 : k;
      transcript_window w = eval_window(c, c.win_start, ke);
      int n = c.transcript.length();
      commit_window(c, std::move(w), c.traj.times[static_cast<std::size_t>(k)], k, fl);
      commit_theta(c, own_theta_next(c, c.transcript.windows.back(), n));
    }
    if (k < c.N) advance(c, k);
  }

  if (windowed && c.win_start < c.N) {
    set_flags fl{};
    if (spec.schedule.mode == window_schedule::kind::sets) fl.truncated = true;
    transcript_window w = eval_window(c, c.win_start, c.N);
    int n = c.transcript.length();
    commit_window(c, std::move(w), c.traj.times[static_cast<std::size_t>(c.N)], c.N, fl);
    commit_theta(c, own_theta_next(c, c.transcript.windows.back(), n));
  }

  tactical_trace out;
  out.traj = std::move(c.traj);
  out.transcript = std::move(c.transcript);
  out.comments = std::move(c.comment_seq);
  out.flags = std::move(c.flags);
  return out;
}

vec eval_field_const(const game& g, double t, const vec& phi, const vec& channels,
                     const vec& theta, const vec& omega, const vec& lambda) {
  int d = g.state_dim;
  std::vector<double> slots(static_cast<std::size_t>(1 + d + channels.size() + lambda.size() +
                                                     (g.binding.evolution.theta ? theta.size() : 0) +
                                                     (g.binding.evolution.omega ? omega.size() : 0)));
  std::size_t p = 0;
  slots[p++] = t;
  for (int j = 0; j < d; ++j) slots[p++] = phi[j];
  for (long j = 0; j < channels.size(); ++j) slots[p++] = channels[j];
  for (long j = 0; j < lambda.size(); ++j) slots[p++] = lambda[j];
  if (g.binding.evolution.theta)
    for (long j = 0; j < theta.size(); ++j) slots[p++] = theta[j];
  if (g.binding.evolution.omega)
    for (long j = 0; j < omega.size(); ++j) slots[p++] = omega[j];
  vec f(d);
  for (int j = 0; j < d; ++j) f[j] = g.dynamics[static_cast<std::size_t>(j)].eval(slots);
  return f;
}

}  // namespace tactica::detail
