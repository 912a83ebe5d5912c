#include "tactica/layouts.hpp"

namespace tactica {

void add_indexed(symbol_table& t, const std::string& prefix, int count) {
  for (int i = 1; i <= count; ++i) t.add(prefix + std::to_string(i));
}

symbol_table dynamics_symbols(const layout_dims& dims, bool bind_theta, bool bind_omega) {
  symbol_table t;
  t.add("t");
  add_indexed(t, dims.state_name, dims.state_dim);
  add_indexed(t, "u", dims.channels);
  add_indexed(t, "lambda", dims.lambda_dim);
  if (bind_theta) add_indexed(t, "theta", dims.theta_dim);
  if (bind_omega) add_indexed(t, "omega", dims.omega_dim);
  return t;
}

symbol_table control_symbols(const layout_dims& dims, bool omega_visible) {
  symbol_table t;
  t.add("t");
  add_indexed(t, dims.state_name, dims.state_dim);
  add_indexed(t, "lambda", dims.lambda_dim);
  add_indexed(t, "theta", dims.theta_dim);
  if (omega_visible) add_indexed(t, "omega", dims.omega_dim);
  return t;
}

symbol_table coupling_symbols(const layout_dims& dims, int player, int hidden_dim,
                              bool theta_known, bool lambda_known) {
  symbol_table t;
  t.add("u0_" + std::to_string(player + 1));
  add_indexed(t, dims.state_name, dims.state_dim);
  add_indexed(t, "eps", hidden_dim);
  if (theta_known) add_indexed(t, "theta", dims.theta_dim);
  if (lambda_known) add_indexed(t, "lambda", dims.lambda_dim);
  return t;
}

symbol_table hidden_symbols(const layout_dims& dims, int player, bool theta_unknown,
                            bool lambda_unknown) {
  symbol_table t;
  t.add("u0_" + std::to_string(player + 1));
  add_indexed(t, dims.state_name, dims.state_dim);
  t.add("t");
  t.add("noise");
  if (theta_unknown) add_indexed(t, "theta", dims.theta_dim);
  if (lambda_unknown) add_indexed(t, "lambda", dims.lambda_dim);
  return t;
}

symbol_table aggregator_symbols(const layout_dims& dims) {
  symbol_table t;
  for (int i = 1; i <= dims.players; ++i) t.add("u0_" + std::to_string(i));
  add_indexed(t, dims.state_name, dims.state_dim);
  add_indexed(t, "eps", dims.hidden_total);
  return t;
}

symbol_table cell_symbols(const layout_dims& dims) {
  symbol_table t;
  add_indexed(t, "eps", dims.hidden_total);
  return t;
}

symbol_table state_functional_symbols(const layout_dims& dims) {
  symbol_table t;
  t.add("t");
  add_indexed(t, "eps", dims.hidden_total);
  add_indexed(t, dims.state_name, dims.state_dim);
  return t;
}

symbol_table control_functional_symbols(const layout_dims& dims) {
  symbol_table t;
  t.add("t");
  for (int i = 1; i <= dims.players; ++i) t.add("u0_" + std::to_string(i));
  add_indexed(t, dims.state_name, dims.state_dim);
  return t;
}

symbol_table summary_symbols(const layout_dims& dims) {
  symbol_table t;
  t.add("t");
  add_indexed(t, dims.state_name, dims.state_dim);
  return t;
}

symbol_table termination_symbols(const layout_dims& dims) {
  symbol_table t;
  t.add("t");
  add_indexed(t, dims.state_name, dims.state_dim);
  add_indexed(t, "omega", dims.omega_dim);
  return t;
}

symbol_table comment_symbols(const layout_dims& dims) {
  symbol_table t;
  add_indexed(t, "theta", dims.theta_dim);
  add_indexed(t, "omega", dims.omega_dim);
  add_indexed(t, "v", dims.v_dim);
  add_indexed(t, "p", dims.param_dim);
  return t;
}

symbol_table invariant_symbols(const layout_dims& dims) {
  symbol_table t;
  t.add("t");
  add_indexed(t, dims.state_name, dims.state_dim);
  for (int i = 1; i <= dims.players; ++i) t.add("u0_" + std::to_string(i));
  add_indexed(t, "u", dims.players);
  add_indexed(t, "eps", dims.hidden_total);
  return t;
}

symbol_table objective_symbols(const layout_dims& dims) {
  symbol_table t;
  t.add("t");
  add_indexed(t, dims.state_name, dims.state_dim);
  for (int i = 1; i <= dims.players; ++i) t.add("u0_" + std::to_string(i));
  add_indexed(t, "u", dims.players);
  add_indexed(t, "eps", dims.hidden_total);
  add_indexed(t, "theta", dims.theta_dim);
  add_indexed(t, "omega", dims.omega_dim);
  return t;
}

symbol_table lambda_symbols() {
  symbol_table t;
  t.add("t");
  return t;
}

symbol_table virtual_symbols(const layout_dims& dims) {
  symbol_table t;
  t.add("t");
  add_indexed(t, dims.state_name, dims.state_dim);
  return t;
}

symbol_table recurrence_symbols(const layout_dims& dims) {
  symbol_table t;
  add_indexed(t, "omega", dims.omega_dim);
  add_indexed(t, "v", dims.v_dim);
  add_indexed(t, "s", dims.summary_dim);
  return t;
}

symbol_table interaction_symbols(const layout_dims& own, const layout_dims& other) {
  symbol_table t;
  add_indexed(t, "theta", own.theta_dim);
  add_indexed(t, "peer", other.theta_dim);
  add_indexed(t, "omega", own.omega_dim);
  add_indexed(t, "v", own.v_dim);
  return t;
}

symbol_table synthesis_symbols(const std::vector<int>& reads,
                               const std::vector<layout_dims>& all, int self) {
  symbol_table t;
  for (int k : reads) {
    const layout_dims& dims = all[static_cast<std::size_t>(k)];
    std::string tag = std::to_string(k + 1) + "_";
    add_indexed(t, "theta" + tag, dims.theta_dim);
    add_indexed(t, "omega" + tag, dims.omega_dim);
    add_indexed(t, "v" + tag, dims.v_dim);
  }
  add_indexed(t, "p", all[static_cast<std::size_t>(self)].param_dim);
  return t;
}

}  // namespace tactica
