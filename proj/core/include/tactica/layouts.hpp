#pragma once

#include <string>
#include <vector>

#include "tactica/expr.hpp"

namespace tactica {

/// Slot layouts for every expression role.
///
/// Each builder returns the symbol table an expression of that role must be
/// parsed against; the run loop fills evaluation slots in exactly the same
/// order. Indexed families use 1-based suffixes (phi1, u1, eps1, ...), with
/// `state_name` selecting between phi and xi spellings of the state stream.
///
/// Dimension arguments:
///   d        state components        m   control channels (players/coalitions)
///   di       one player's hidden     D   stacked hidden components
///   K        comment components      M   window-state components
///   V        control-side components L   slow-control schedule components
///   P        family parameters       S   declared summary components

struct layout_dims {
  int state_dim = 0;
  int players = 0;
  int channels = 0;
  int hidden_total = 0;
  int theta_dim = 0;
  int omega_dim = 0;
  int v_dim = 0;
  int lambda_dim = 0;
  int param_dim = 0;
  int summary_dim = 0;
  std::string state_name = "phi";
};

void add_indexed(symbol_table& t, const std::string& prefix, int count);

/// Evolution field: t, phi[d], u[m], lambda[L], then theta[K] and omega[M]
/// when the evolution binding routes them in.
symbol_table dynamics_symbols(const layout_dims& dims, bool bind_theta, bool bind_omega);

/// Pure control strategies: t, phi[d], lambda[L], theta[K], and omega[M]
/// only when the scenario declares the window stream visible to players.
/// Hidden parameters are structurally absent.
symbol_table control_symbols(const layout_dims& dims, bool omega_visible);

/// Coupling of player i: u0_<i>, phi[d], eps[di] (own components), then
/// theta[K] when the feedback binding is known and lambda[L] when the
/// schedule binding is known.
symbol_table coupling_symbols(const layout_dims& dims, int player, int hidden_dim,
                              bool theta_known, bool lambda_known);

/// Hidden map of player i: u0_<i>, phi[d], t, noise, then theta[K] when the
/// feedback binding is unknown and lambda[L] when the schedule binding is
/// unknown.
symbol_table hidden_symbols(const layout_dims& dims, int player, bool theta_unknown,
                            bool lambda_unknown);

/// Coalition aggregators: u0[1..m players], phi[d], eps[D stacked].
symbol_table aggregator_symbols(const layout_dims& dims);

/// Cell membership predicates: eps[D stacked].
symbol_table cell_symbols(const layout_dims& dims);

/// State-side window functionals: t, eps[D], state[d].
symbol_table state_functional_symbols(const layout_dims& dims);

/// Control-side window functionals: t, u0[1..players], state[d].
symbol_table control_functional_symbols(const layout_dims& dims);

/// Declared state-window summaries: t, state[d].
symbol_table summary_symbols(const layout_dims& dims);

/// Set termination rules: t, phi[d], omega[M] (window value at set start).
symbol_table termination_symbols(const layout_dims& dims);

/// Comment rules: theta[K] (previous), omega[M], v[V], p[P]. Nothing else
/// by design.
symbol_table comment_symbols(const layout_dims& dims);

/// Invariant functionals: t, phi[d], u0[players], u[players], eps[D].
symbol_table invariant_symbols(const layout_dims& dims);

/// Objective integrand/terminal: t, phi[d], u0[players], u[players],
/// eps[D], theta[K], omega[M] (held values per node).
symbol_table objective_symbols(const layout_dims& dims);

/// Slow-control schedule components: t only.
symbol_table lambda_symbols();

/// Virtual strategies for forecast games: t, phi[d].
symbol_table virtual_symbols(const layout_dims& dims);

/// Recurrence model basis terms: omega[M] (previous window), v[V], s[S].
symbol_table recurrence_symbols(const layout_dims& dims);

/// Pairwise comment interaction terms: theta[K own previous],
/// peer[K other previous], omega[M own], v[V own].
symbol_table interaction_symbols(const layout_dims& own, const layout_dims& other);

/// Synthesis rule entries: for every declared dependency system k
/// (ascending, 1-based in the names), theta<k>_[K_k] (previous window),
/// omega<k>_[M_k], v<k>_[V_k], then the updating system's own p[P].
/// `reads` holds 0-based indices into `all`.
symbol_table synthesis_symbols(const std::vector<int>& reads,
                               const std::vector<layout_dims>& all, int self);

}  // namespace tactica
