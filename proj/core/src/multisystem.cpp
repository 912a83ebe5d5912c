#include "tactica/multisystem.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "runloop.hpp"
#include "tactica/errors.hpp"

namespace tactica {

namespace {

[[noreturn]] void bad_bundle(const std::string& what) { throw contract_error("bundle: " + what); }

// Validates that a synthesis rule fits the bundle and returns nothing; the
// dependency graph is the per-entry read lists.
void check_rule(const system_bundle& b, const synthesis_rule& rule) {
  int S = static_cast<int>(b.systems.size());
  if (static_cast<int>(rule.entries.size()) != S)
    bad_bundle("synthesis rule has " + std::to_string(rule.entries.size()) +
               " entries for " + std::to_string(S) + " systems");
  for (int j = 0; j < S; ++j) {
    const synthesis_rule::entry& e = rule.entries[static_cast<std::size_t>(j)];
    int prev = -1;
    for (int r : e.reads) {
      if (r < 0 || r >= S)
        bad_bundle("system " + std::to_string(j + 1) + " reads unknown system " +
                   std::to_string(r + 1));
      if (r <= prev)
        bad_bundle("system " + std::to_string(j + 1) +
                   " must list its dependencies in ascending order without repeats");
      prev = r;
    }
    int kj = b.systems[static_cast<std::size_t>(j)].comments
                 ? b.systems[static_cast<std::size_t>(j)].comments->dim()
                 : 0;
    if (static_cast<int>(e.update.size()) != kj)
      bad_bundle("synthesis update for system " + std::to_string(j + 1) + " has " +
                 std::to_string(e.update.size()) + " components, comment has " +
                 std::to_string(kj));
    for (const expr& ex : e.update)
      if (ex.empty()) bad_bundle("synthesis update for system " + std::to_string(j + 1) +
                                 " has an empty component");
  }
}

void check_interactions(const system_bundle& b) {
  int S = static_cast<int>(b.systems.size());
  for (const interaction_term& term : b.interactions) {
    if (term.self < 0 || term.self >= S || term.other < 0 || term.other >= S)
      bad_bundle("interaction term references an unknown system");
    if (term.self == term.other)
      bad_bundle("interaction terms connect two distinct systems");
    int ks = b.systems[static_cast<std::size_t>(term.self)].comments
                 ? b.systems[static_cast<std::size_t>(term.self)].comments->dim()
                 : 0;
    if (static_cast<int>(term.update.size()) != ks)
      bad_bundle("interaction term for system " + std::to_string(term.self + 1) + " has " +
                 std::to_string(term.update.size()) + " components, comment has " +
                 std::to_string(ks));
    for (const expr& ex : term.update)
      if (ex.empty()) bad_bundle("interaction term has an empty component");
  }
}

// One bundle run. `rule` selects the synthesis update; without it each
// system applies its own comment rule plus any interaction terms.
std::vector<tactical_trace> run_bundle(const system_bundle& b, const synthesis_rule* rule,
                                       const run_options& opts) {
  int S = static_cast<int>(b.systems.size());
  if (S < 1) bad_bundle("no systems");
  if (rule)
    check_rule(b, *rule);
  else
    check_interactions(b);

  const game& g0 = b.systems[0].base;
  std::uint64_t bundle_seed = opts.seed.value_or(g0.seed);
  double h = opts.step.value_or(g0.h);
  double horizon = opts.horizon.value_or(g0.horizon);
  for (const tactical_game& sysname : b.systems) {
    if (sysname.base.t0 != g0.t0) bad_bundle("systems start at different times");
    if (sysname.schedule.mode != window_schedule::kind::none)
      bad_bundle("member systems inherit the shared schedule; drop their own");
  }

  // Per-system workspaces run without their own schedules; the shared
  // schedule below drives closures for all of them at once.
  std::vector<tactical_game> specs(b.systems.begin(), b.systems.end());
  std::vector<detail::sys_ctx> c(static_cast<std::size_t>(S));
  for (int j = 0; j < S; ++j)
    detail::init_sys(c[static_cast<std::size_t>(j)], specs[static_cast<std::size_t>(j)],
                     bundle_system_seed(bundle_seed, j), h, horizon, {});
  long N = c[0].N;
  double t0 = c[0].t0;

  bool cells = false;
  std::vector<long> fixed_nodes;
  int D_total = 0;
  for (int j = 0; j < S; ++j) D_total += c[static_cast<std::size_t>(j)].D;
  switch (b.schedule.mode) {
    case window_schedule::kind::fixed:
      fixed_nodes = detail::fixed_boundary_nodes(b.schedule.partition, t0, h, horizon, N);
      break;
    case window_schedule::kind::cells:
      cells = true;
      if (!b.schedule.complex) bad_bundle("transition schedule needs a cell complex");
      if (b.schedule.complex->cells.empty()) bad_bundle("cell complex has no cells");
      if (D_total < 1) bad_bundle("transition schedule needs hidden components");
      if (b.schedule.complex->ambient_dim != D_total)
        bad_bundle("cell complex dimension does not match the stacked hidden dimension");
      if (b.schedule.hysteresis < 0.0) bad_bundle("hysteresis must be nonnegative");
      break;
    default:
      bad_bundle("shared schedule must be a fixed partition or cell transitions");
  }

  std::vector<double> cell_slots(static_cast<std::size_t>(D_total), 0.0);
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(N + 1));
  int prev_label = -1;
  std::size_t next_fixed = 0;
  long win_start = 0;

  for (int j = 0; j < S; ++j) {
    c[static_cast<std::size_t>(j)].transcript.boundaries.push_back(t0);
    c[static_cast<std::size_t>(j)].comment_seq.push_back(c[static_cast<std::size_t>(j)].theta);
  }

  std::vector<transcript_window> ws(static_cast<std::size_t>(S));
  std::vector<vec> theta_next(static_cast<std::size_t>(S));
  std::vector<double> slots;

  // theta_next for system j from the pre-commit comment snapshot and the
  // just-reduced windows.
  auto compute_theta = [&](int j, int n) -> vec {
    detail::sys_ctx& cj = c[static_cast<std::size_t>(j)];
    if (rule) {
      const synthesis_rule::entry& e = rule->entries[static_cast<std::size_t>(j)];
      slots.clear();
      for (int r : e.reads) {
        const detail::sys_ctx& cr = c[static_cast<std::size_t>(r)];
        const transcript_window& wr = ws[static_cast<std::size_t>(r)];
        for (int q = 0; q < cr.K; ++q) slots.push_back(cr.theta[q]);
        for (int q = 0; q < cr.M; ++q) slots.push_back(wr.omega[q]);
        for (int q = 0; q < cr.V; ++q) slots.push_back(wr.v[q]);
      }
      for (long q = 0; q < cj.spec->params.size(); ++q) slots.push_back(cj.spec->params[q]);
      vec out(cj.K);
      for (int q = 0; q < cj.K; ++q) {
        out[q] = e.update[static_cast<std::size_t>(q)].eval(slots);
        if (!std::isfinite(out[q]))
          throw numeric_error("synthesis update for system " + std::to_string(j + 1) +
                              ", window " + std::to_string(n + 1) + " is non-finite");
      }
      return out;
    }
    vec out = detail::own_theta_next(cj, ws[static_cast<std::size_t>(j)], n);
    for (const interaction_term& term : b.interactions) {
      if (term.self != j) continue;
      const detail::sys_ctx& co = c[static_cast<std::size_t>(term.other)];
      const transcript_window& wj = ws[static_cast<std::size_t>(j)];
      slots.clear();
      for (int q = 0; q < cj.K; ++q) slots.push_back(cj.theta[q]);
      for (int q = 0; q < co.K; ++q) slots.push_back(co.theta[q]);
      for (int q = 0; q < cj.M; ++q) slots.push_back(wj.omega[q]);
      for (int q = 0; q < cj.V; ++q) slots.push_back(wj.v[q]);
      for (int q = 0; q < cj.K; ++q) {
        double dv = term.update[static_cast<std::size_t>(q)].eval(slots);
        if (!std::isfinite(dv))
          throw numeric_error("interaction into system " + std::to_string(j + 1) +
                              ", window " + std::to_string(n + 1) + " is non-finite");
        out[q] += dv;
      }
    }
    return out;
  };

  auto close_window = [&](long k, long ke) {
    double bt = c[0].traj.times[static_cast<std::size_t>(k)];
    int n = c[0].transcript.length();
    for (int j = 0; j < S; ++j)
      ws[static_cast<std::size_t>(j)] =
          detail::eval_window(c[static_cast<std::size_t>(j)], win_start, ke);
    for (int j = 0; j < S; ++j) theta_next[static_cast<std::size_t>(j)] = compute_theta(j, n);
    for (int j = 0; j < S; ++j) {
      detail::commit_window(c[static_cast<std::size_t>(j)],
                            std::move(ws[static_cast<std::size_t>(j)]), bt, k, {});
      detail::commit_theta(c[static_cast<std::size_t>(j)],
                           std::move(theta_next[static_cast<std::size_t>(j)]));
    }
    win_start = k;
  };

  for (long k = 0; k <= N; ++k) {
    for (int j = 0; j < S; ++j) detail::eval_node(c[static_cast<std::size_t>(j)], k);
    bool close = false;
    long ke = k;
    if (cells) {
      std::size_t p = 0;
      for (int j = 0; j < S; ++j) {
        const detail::sys_ctx& cj = c[static_cast<std::size_t>(j)];
        for (int q = 0; q < cj.D; ++q) cell_slots[p++] = cj.eps_now[q];
      }
      double t = t0 + static_cast<double>(k) * h;
      int label = detail::sticky_label(*b.schedule.complex, b.schedule.hysteresis, cell_slots,
                                       prev_label, t);
      labels.push_back(label);
      for (int j = 0; j < S; ++j) c[static_cast<std::size_t>(j)].traj.cell.back() = label;
      close = k >= 1 && k < N &&
              labels[static_cast<std::size_t>(k)] != labels[static_cast<std::size_t>(k - 1)];
      prev_label = label;
      ke = k - 1;
    } else if (next_fixed < fixed_nodes.size() && k == fixed_nodes[next_fixed]) {
      ++next_fixed;
      close = true;
    }
    if (close) close_window(k, ke);
    if (k < N)
      for (int j = 0; j < S; ++j) detail::advance(c[static_cast<std::size_t>(j)], k);
  }
  if (win_start < N) close_window(N, N);

  std::vector<tactical_trace> out(static_cast<std::size_t>(S));
  for (int j = 0; j < S; ++j) {
    detail::sys_ctx& cj = c[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(j)].traj = std::move(cj.traj);
    out[static_cast<std::size_t>(j)].transcript = std::move(cj.transcript);
    out[static_cast<std::size_t>(j)].comments = std::move(cj.comment_seq);
  }
  return out;
}

}  // namespace

std::uint64_t bundle_system_seed(std::uint64_t bundle_seed, int system_index) {
  // Dedicated substream per member, disjoint from the player noise salts a
  // single-system run derives from its own seed.
  splitmix64 root(bundle_seed);
  return root.split(0x53595354ULL + static_cast<std::uint64_t>(system_index)).next_u64();
}

system_bundle couple_comments(const tactical_game& a, const tactical_game& b,
                              std::vector<interaction_term> terms) {
  if (a.schedule.mode != window_schedule::kind::fixed ||
      b.schedule.mode != window_schedule::kind::fixed)
    bad_bundle("coupling needs fixed window schedules on both systems");
  const fixed_partition& pa = a.schedule.partition;
  const fixed_partition& pb = b.schedule.partition;
  bool same = pa.times.size() == pb.times.size() &&
              (!pa.times.empty() || pa.uniform_windows == pb.uniform_windows);
  for (std::size_t i = 0; same && i < pa.times.size(); ++i)
    same = pa.times[i] == pb.times[i];
  if (!same) bad_bundle("window partitions of the two systems do not align");
  if (a.base.t0 != b.base.t0) bad_bundle("systems start at different times");

  system_bundle out;
  out.schedule = a.schedule;
  out.systems.push_back(a);
  out.systems.push_back(b);
  for (tactical_game& sysname : out.systems) sysname.schedule = window_schedule{};
  out.interactions = std::move(terms);
  check_interactions(out);
  return out;
}

unified_system synthesize_comments(const system_bundle& bundle, synthesis_rule rule) {
  check_rule(bundle, rule);
  unified_system u;
  u.bundle = bundle;
  u.bundle.interactions.clear();
  u.rule = std::move(rule);
  return u;
}

std::vector<tactical_trace> run_coupled(const system_bundle& bundle, const run_options& opts) {
  return run_bundle(bundle, nullptr, opts);
}

std::vector<tactical_trace> run_unified(const unified_system& u, const run_options& opts) {
  return run_bundle(u.bundle, &u.rule, opts);
}

localization_result localize_system(const unified_system& u,
                                    const std::vector<localization_candidate>& candidates,
                                    const std::vector<probe_scenario>& probes,
                                    const run_options& opts) {
  int S = static_cast<int>(u.bundle.systems.size());
  if (candidates.empty()) bad_bundle("localization needs at least one candidate partition");
  if (probes.empty()) bad_bundle("localization needs at least one probe run");
  for (const localization_candidate& cand : candidates) {
    std::vector<int> seen(static_cast<std::size_t>(S), 0);
    for (const std::vector<int>& blk : cand.blocks) {
      if (blk.empty()) bad_bundle("candidate partition has an empty block");
      for (int j : blk) {
        if (j < 0 || j >= S) bad_bundle("candidate partition names an unknown system");
        if (seen[static_cast<std::size_t>(j)]++)
          bad_bundle("candidate partition repeats system " + std::to_string(j + 1));
      }
    }
    for (int j = 0; j < S; ++j)
      if (!seen[static_cast<std::size_t>(j)])
        bad_bundle("candidate partition misses system " + std::to_string(j + 1));
  }

  // Comment dimensions per system.
  std::vector<int> kdim(static_cast<std::size_t>(S), 0);
  for (int j = 0; j < S; ++j)
    kdim[static_cast<std::size_t>(j)] =
        u.bundle.systems[static_cast<std::size_t>(j)].comments
            ? u.bundle.systems[static_cast<std::size_t>(j)].comments->dim()
            : 0;

  // Probe transitions: per probe, per system, the comment sequence and the
  // window stream the reconstruction may use.
  struct probe_record {
    std::vector<std::vector<vec>> theta;  // [system][0..W] (index 0 = initial)
    std::vector<std::vector<vec>> omega;  // [system][0..W-1]
    std::vector<std::vector<vec>> v;
  };
  std::vector<probe_record> records;
  for (const probe_scenario& probe : probes) {
    unified_system up = u;
    if (!probe.phi0.empty()) {
      if (static_cast<int>(probe.phi0.size()) != S)
        bad_bundle("probe initial states must cover every system");
      for (int j = 0; j < S; ++j)
        up.bundle.systems[static_cast<std::size_t>(j)].base.phi0 =
            probe.phi0[static_cast<std::size_t>(j)];
    }
    run_options ro;
    ro.seed = probe.run.seed ? probe.run.seed : opts.seed;
    ro.step = probe.run.step ? probe.run.step : opts.step;
    ro.horizon = probe.run.horizon ? probe.run.horizon : opts.horizon;
    std::vector<tactical_trace> traces = run_unified(up, ro);
    probe_record rec;
    rec.theta.resize(static_cast<std::size_t>(S));
    rec.omega.resize(static_cast<std::size_t>(S));
    rec.v.resize(static_cast<std::size_t>(S));
    for (int j = 0; j < S; ++j) {
      const tactical_trace& tr = traces[static_cast<std::size_t>(j)];
      rec.theta[static_cast<std::size_t>(j)] = tr.comments;
      for (const transcript_window& w : tr.transcript.windows) {
        rec.omega[static_cast<std::size_t>(j)].push_back(w.omega);
        rec.v[static_cast<std::size_t>(j)].push_back(w.v);
      }
    }
    records.push_back(std::move(rec));
  }

  // Cross-block dependency edges of the synthesis rule per candidate.
  std::vector<int> crossings;
  for (const localization_candidate& cand : candidates) {
    std::vector<int> block_of(static_cast<std::size_t>(S), 0);
    for (std::size_t bi = 0; bi < cand.blocks.size(); ++bi)
      for (int j : cand.blocks[bi]) block_of[static_cast<std::size_t>(j)] = static_cast<int>(bi);
    int cross = 0;
    for (int j = 0; j < S; ++j)
      for (int r : u.rule.entries[static_cast<std::size_t>(j)].reads)
        if (r != j && block_of[static_cast<std::size_t>(r)] != block_of[static_cast<std::size_t>(j)])
          ++cross;
    crossings.push_back(cross);
  }

  std::vector<double> errors;
  for (const localization_candidate& cand : candidates) {
    double cand_err = 0.0;
    for (const std::vector<int>& blk : cand.blocks) {
      int kb = 0, mb = 0, vb = 0;
      for (int j : blk) {
        kb += kdim[static_cast<std::size_t>(j)];
        mb += static_cast<int>(records[0].omega[static_cast<std::size_t>(j)].empty()
                                   ? 0
                                   : records[0].omega[static_cast<std::size_t>(j)][0].size());
        vb += static_cast<int>(records[0].v[static_cast<std::size_t>(j)].empty()
                                   ? 0
                                   : records[0].v[static_cast<std::size_t>(j)][0].size());
      }
      if (kb == 0) continue;

      auto stack_theta = [&](const probe_record& rec, std::size_t n) {
        vec x(kb);
        long p = 0;
        for (int j : blk)
          for (long q = 0; q < rec.theta[static_cast<std::size_t>(j)][n].size(); ++q)
            x[p++] = rec.theta[static_cast<std::size_t>(j)][n][q];
        return x;
      };
      auto stack_inputs = [&](const probe_record& rec, const vec& th, std::size_t n) {
        vec x(1 + kb + mb + vb);
        long p = 0;
        x[p++] = 1.0;
        for (long q = 0; q < th.size(); ++q) x[p++] = th[q];
        for (int j : blk)
          for (long q = 0; q < rec.omega[static_cast<std::size_t>(j)][n].size(); ++q)
            x[p++] = rec.omega[static_cast<std::size_t>(j)][n][q];
        for (int j : blk)
          for (long q = 0; q < rec.v[static_cast<std::size_t>(j)][n].size(); ++q)
            x[p++] = rec.v[static_cast<std::size_t>(j)][n][q];
        return x;
      };

      long rows = 0;
      for (const probe_record& rec : records)
        rows += static_cast<long>(rec.omega[static_cast<std::size_t>(blk[0])].size());
      if (rows < 1) bad_bundle("probe runs produced no windows");
      Eigen::MatrixXd A(rows, 1 + kb + mb + vb);
      Eigen::MatrixXd Y(rows, kb);
      long r = 0;
      for (const probe_record& rec : records) {
        std::size_t W = rec.omega[static_cast<std::size_t>(blk[0])].size();
        for (std::size_t n = 0; n < W; ++n) {
          A.row(r) = stack_inputs(rec, stack_theta(rec, n), n).transpose();
          Y.row(r) = stack_theta(rec, n + 1).transpose();
          ++r;
        }
      }
      Eigen::MatrixXd coef = A.colPivHouseholderQr().solve(Y);

      // Chained replay: reconstructed comments feed the next prediction;
      // window values stay the observed ones.
      for (const probe_record& rec : records) {
        std::size_t W = rec.omega[static_cast<std::size_t>(blk[0])].size();
        vec th = stack_theta(rec, 0);
        for (std::size_t n = 0; n < W; ++n) {
          vec pred = coef.transpose() * stack_inputs(rec, th, n);
          vec truth = stack_theta(rec, n + 1);
          double e = (pred - truth).cwiseAbs().maxCoeff();
          if (!std::isfinite(e)) e = std::numeric_limits<double>::infinity();
          cand_err = std::max(cand_err, e);
          th = std::move(pred);
        }
      }
    }
    errors.push_back(cand_err);
  }

  int best = 0;
  for (int ci = 1; ci < static_cast<int>(candidates.size()); ++ci) {
    double e = errors[static_cast<std::size_t>(ci)];
    double eb = errors[static_cast<std::size_t>(best)];
    if (e < eb ||
        (e == eb && crossings[static_cast<std::size_t>(ci)] < crossings[static_cast<std::size_t>(best)]))
      best = ci;
  }

  localization_result out;
  out.chosen = best;
  out.blocks = candidates[static_cast<std::size_t>(best)].blocks;
  out.reconstruction_error = errors[static_cast<std::size_t>(best)];
  out.candidate_errors = std::move(errors);
  out.cross_block_dependencies = std::move(crossings);
  return out;
}

}  // namespace tactica
