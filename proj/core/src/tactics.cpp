#include "tactica/tactics.hpp"

#include <cmath>
#include <string>

#include "runloop.hpp"
#include "tactica/errors.hpp"

namespace tactica {

vec update_comment(const comment_rule& rule, const vec& theta_prev, const vec& omega,
                   const vec& v, const vec& params, int window_index) {
  int K = rule.dim();
  if (theta_prev.size() != K) throw contract_error("comment update: wrong comment dimension");
  std::vector<double> slots(
      static_cast<std::size_t>(K + omega.size() + v.size() + params.size()));
  std::size_t p = 0;
  for (int j = 0; j < K; ++j) slots[p++] = theta_prev[j];
  for (long j = 0; j < omega.size(); ++j) slots[p++] = omega[j];
  for (long j = 0; j < v.size(); ++j) slots[p++] = v[j];
  for (long j = 0; j < params.size(); ++j) slots[p++] = params[j];
  vec out(K);
  for (int j = 0; j < K; ++j) {
    out[j] = rule.update[static_cast<std::size_t>(j)].eval(slots);
    if (!std::isfinite(out[j]))
      throw numeric_error("comment component " + std::to_string(j + 1) +
                          " is non-finite after window " + std::to_string(window_index + 1));
  }
  return out;
}

vec bound_game::field(double t, const vec& phi, const vec& channels, const vec& lambda) const {
  if (!base) throw contract_error("bound_game: not bound to a game");
  return detail::eval_field_const(*base, t, phi, channels, theta, omega, lambda);
}

double bound_game::coupling(int player, double pure, const vec& phi, const vec& hidden,
                            const vec& lambda) const {
  if (!base) throw contract_error("bound_game: not bound to a game");
  return eval_control(*base, player, pure, phi, hidden, theta, lambda);
}

bound_game bind_parameters(const game& g, const vec& theta, const vec& omega) {
  bound_game b;
  b.base = &g;
  b.theta = theta;
  b.omega = omega;
  return b;
}

tactical_trace run_tactical(const tactical_game& spec, const run_options& opts) {
  return detail::run_windowed(spec, opts);
}

}  // namespace tactica
