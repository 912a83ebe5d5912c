#pragma once

#include <optional>

#include "tactica/tactics.hpp"

namespace tactica {

/// Parametrized family of comment rules: one rule whose update expressions
/// read the family parameters p1..pP, together with box bounds on p.
struct theta_family {
  comment_rule rule;
  vec lower;
  vec upper;
  int param_dim() const { return static_cast<int>(lower.size()); }
};

/// Run performance J(trace) = integral of `integrand` over the run
/// (trapezoid on the trajectory grid) plus `terminal` at the final node.
/// Either part may be empty. Higher is better.
struct performance_functional {
  expr integrand;
  expr terminal;
};

/// J evaluated over a finished windowed run. Per-node comment and window
/// values are the zero-order-hold streams the run actually used: at a
/// closure node they are the pre-update values, matching what the recorded
/// controls saw.
double evaluate_objective(const tactical_game& spec, const performance_functional& J,
                          const tactical_trace& trace);

/// Runs the tactical game with the family rule at parameters p and scores
/// it. Out-of-bounds p is a contract error; a run that fails numerically
/// reports no score rather than a number.
std::optional<double> evaluate_theta(const tactical_game& spec, const theta_family& family,
                                     const vec& p, const performance_functional& J,
                                     const run_options& opts = {});

struct adapt_options {
  int budget = 100;            // total number of objective evaluations allowed
  double initial_step = 0.25;
  double min_step = 1e-6;
  std::uint64_t seed = 0;      // drives probe direction order only
  run_options run;
};

struct adapt_history_entry {
  int evaluation = 0;  // 1-based evaluation count at acceptance
  vec params;
  double score = 0.0;
};

struct adapt_result {
  vec params;
  double score = 0.0;
  std::vector<adapt_history_entry> history;  // accepted points, scores nondecreasing
  int evaluations = 0;
};

/// Seeded coordinate hill-climb over the family parameters, maximizing J.
/// The probe step halves after every full sweep with no accepted move;
/// candidates outside the family bounds are clipped to them. Budget counts
/// objective evaluations; budget 0 returns p0 untouched with empty history.
adapt_result adapt_theta(const tactical_game& spec, const theta_family& family, const vec& p0,
                         const performance_functional& J, const adapt_options& opts = {});

}  // namespace tactica
