#pragma once

#include "tactica/tactics.hpp"

namespace tactica {

/// Multistage run whose windows ("sets") end by the declared termination
/// rule or its duration guard. Validates that the schedule is rule-driven;
/// otherwise identical to run_tactical. Consecutive sets chain through the
/// shared boundary node, so each set starts in the previous set's final
/// state exactly.
tactical_trace run_perception_sets(const tactical_game& spec, const run_options& opts = {});

/// Lag-1 serial correlation verdict on a scalar sequence.
struct quasirandom_report {
  double lag_correlation = 0.0;
  bool degenerate = false;  // zero variance; verdict forced false
  bool quasirandom = false;
};

/// Pearson correlation between the sequence and its one-step shift.
/// Quasirandom iff |correlation| < threshold and the sequence is not
/// degenerate. Sequences shorter than 8 are a contract error.
quasirandom_report test_quasirandom(const std::vector<double>& seq, double threshold = 0.3);

/// Correlation structure between the control-side and state-side window
/// sequences of one run.
struct resonance_report {
  Eigen::MatrixXd correlation;        // omega component x v component
  double max_abs_correlation = 0.0;
  bool resonant = false;
  double mean_hidden_variation = 0.0;  // within-window total variation of the hidden stream
  bool timescale_ok = false;           // hidden drift slow against the window rhythm
};

/// Componentwise Pearson correlations between {v_n} and {omega_n}.
/// Resonant iff some |correlation| >= corr_threshold. The timescale flag
/// checks that hidden parameters drift slowly within windows (mean
/// per-window total variation <= variation_threshold); a violated
/// condition only withholds the flag, the statistic is still reported.
resonance_report detect_resonance(const tactical_trace& trace, double corr_threshold = 0.8,
                                  double variation_threshold = 0.1);

/// An affine relation holding along the window/comment streams: the listed
/// coefficients applied to the stacked depth-k lag vector stay within
/// `residual` of the constant.
struct oracle_invariant {
  vec coefficients;       // over stacked (omega, theta) pairs, newest first
  double constant = 0.0;
  double residual = 0.0;
  std::string description;  // printed linear form
};

/// Detects affine relations over sliding depth-k stacks of (omega_n,
/// theta_n) pairs: directions whose deviation stays below tol across every
/// stack. theta_n is the comment produced by window n. Depth counts pairs:
/// depth 1 reads only the current window. The sequences must be at least
/// depth + 2 long and must yield more stacks than stacked components;
/// with fewer, affine relations are unfalsifiable and the call is a
/// contract error.
std::vector<oracle_invariant> detect_invariants(const std::vector<vec>& omega,
                                                const std::vector<vec>& theta, int depth,
                                                double tol = 1e-6);

/// Everything a perceptive-oracle pass derives from one tactical run.
struct oracle_report {
  tactical_trace trace;
  std::vector<quasirandom_report> omega_quasirandom;  // per omega component
  bool roulette = false;  // every omega component passed the quasirandom test
  resonance_report resonance;
  std::vector<oracle_invariant> invariants;
};

struct oracle_options {
  double quasirandom_threshold = 0.3;
  double resonance_threshold = 0.8;
  double variation_threshold = 0.1;
  int invariant_depth = 1;
  double invariant_tol = 1e-6;
};

/// Runs the game, tests each omega component for quasirandomness (the
/// roulette qualification), measures resonance between the v and omega
/// streams, and searches for affine invariants over (omega, theta) pairs.
/// Needs at least 8 windows. Resonance is skipped (default report) when
/// either stream is absent; invariant search is skipped (empty result)
/// when the transcript is too short for the requested depth.
oracle_report run_oracle(const tactical_game& spec, const oracle_options& oopts = {},
                         const run_options& opts = {});

/// Same analysis over a run whose comments stay frozen at their initial
/// value: the stationary reduction behind the roulette qualification.
oracle_report run_roulette(const tactical_game& spec, const oracle_options& oopts = {},
                           const run_options& opts = {});

}  // namespace tactica
