#include "tactica/dialogue.hpp"

#include <cmath>
#include <string>

#include "runloop.hpp"
#include "tactica/errors.hpp"

namespace tactica {

game_state advance_intention(const game& g, const game_state& s, const vec& channels, double h) {
  return step(g, s, channels, h);
}

namespace {

// Reduces one functional over [kb, ke] with the given per-node fill.
template <class Fill>
double reduce_over(const window_functional& f, const trajectory& tr, long kb, long ke,
                   std::vector<double>& slots, Fill&& fill) {
  if (f.reduction == window_reduction::last) {
    fill(ke);
    return f.value.eval(slots);
  }
  fill(kb);
  double prev = f.value.eval(slots);
  if (kb == ke)  // single-node window: integral 0, mean = node value
    return f.reduction == window_reduction::integral ? 0.0 : prev;
  double acc = 0.0;
  for (long k = kb + 1; k <= ke; ++k) {
    fill(k);
    double cur = f.value.eval(slots);
    acc += (prev + cur);
    prev = cur;
  }
  double integral = acc * (tr.h / 2);
  if (f.reduction == window_reduction::integral) return integral;
  return integral / (tr.times[static_cast<std::size_t>(ke)] -
                     tr.times[static_cast<std::size_t>(kb)]);
}

}  // namespace

transcript_window eval_window_functionals(const window_functionals& fs, const trajectory& tr,
                                          long k_begin, long k_end) {
  if (k_begin < 0 || k_end < k_begin || k_end >= tr.nodes())
    throw contract_error("window evaluation: node range outside the trajectory");
  int d = tr.phi.empty() ? 0 : static_cast<int>(tr.phi[0].size());
  int m = tr.pure.empty() ? 0 : static_cast<int>(tr.pure[0].size());
  int D = tr.hidden.empty() ? 0 : static_cast<int>(tr.hidden[0].size());

  transcript_window w;
  w.k_begin = k_begin;
  w.k_end = k_end;
  w.t_begin = tr.times[static_cast<std::size_t>(k_begin)];
  w.t_end = tr.times[static_cast<std::size_t>(k_end)];

  // Slot layouts mirror state_functional_symbols / control_functional_symbols
  // / summary_symbols.
  std::vector<double> sslots(static_cast<std::size_t>(1 + D + d));
  auto fill_state = [&](long k) {
    std::size_t p = 0;
    sslots[p++] = tr.times[static_cast<std::size_t>(k)];
    for (int j = 0; j < D; ++j) sslots[p++] = tr.hidden[static_cast<std::size_t>(k)][j];
    for (int j = 0; j < d; ++j) sslots[p++] = tr.phi[static_cast<std::size_t>(k)][j];
  };
  std::vector<double> cslots(static_cast<std::size_t>(1 + m + d));
  auto fill_control = [&](long k) {
    std::size_t p = 0;
    cslots[p++] = tr.times[static_cast<std::size_t>(k)];
    for (int j = 0; j < m; ++j) cslots[p++] = tr.pure[static_cast<std::size_t>(k)][j];
    for (int j = 0; j < d; ++j) cslots[p++] = tr.phi[static_cast<std::size_t>(k)][j];
  };
  std::vector<double> mslots(static_cast<std::size_t>(1 + d));
  auto fill_summary = [&](long k) {
    std::size_t p = 0;
    mslots[p++] = tr.times[static_cast<std::size_t>(k)];
    for (int j = 0; j < d; ++j) mslots[p++] = tr.phi[static_cast<std::size_t>(k)][j];
  };

  w.omega = vec(fs.omega_dim());
  for (int i = 0; i < fs.omega_dim(); ++i)
    w.omega[i] = reduce_over(fs.omega[static_cast<std::size_t>(i)], tr, k_begin, k_end, sslots,
                             fill_state);
  w.v = vec(fs.v_dim());
  for (int i = 0; i < fs.v_dim(); ++i)
    w.v[i] = reduce_over(fs.v[static_cast<std::size_t>(i)], tr, k_begin, k_end, cslots,
                         fill_control);
  w.summary = vec(fs.summary_dim());
  for (int i = 0; i < fs.summary_dim(); ++i)
    w.summary[i] = reduce_over(fs.summaries[static_cast<std::size_t>(i)], tr, k_begin, k_end,
                               mslots, fill_summary);

  for (long j = 0; j < w.omega.size(); ++j)
    if (!std::isfinite(w.omega[j]))
      throw numeric_error("state-side window value " + std::to_string(j + 1) +
                          " is non-finite over [" + std::to_string(w.t_begin) + ", " +
                          std::to_string(w.t_end) + "]");
  for (long j = 0; j < w.v.size(); ++j)
    if (!std::isfinite(w.v[j]))
      throw numeric_error("control-side window value " + std::to_string(j + 1) +
                          " is non-finite over [" + std::to_string(w.t_begin) + ", " +
                          std::to_string(w.t_end) + "]");
  return w;
}

dialogue_transcript run_dialogue(const dialogue_spec& spec, const run_options& opts) {
  tactical_game tg;
  tg.base = spec.base;
  tg.schedule.mode = window_schedule::kind::fixed;
  tg.schedule.partition = spec.partition;
  tg.functionals = spec.functionals;
  return detail::run_windowed(tg, opts).transcript;
}

}  // namespace tactica
