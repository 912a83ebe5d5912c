#pragma once

#include "tactica/tactics.hpp"

namespace tactica {

/// Additive comment correction from one peer system: the receiving system's
/// update gains update(theta_self_prev, theta_peer_prev, omega_self, v_self).
/// Output dimension equals the receiving system's comment dimension.
struct interaction_term {
  int self = 0;   // receiving system index
  int other = 0;  // peer whose previous comment is read
  std::vector<expr> update;
};

/// A set of tactical systems advancing on one clock with one shared window
/// schedule. The shared schedule replaces the per-system ones: either a
/// fixed partition or cell transitions over the stacked hidden components
/// of all systems.
struct system_bundle {
  std::vector<tactical_game> systems;
  window_schedule schedule;
  std::vector<interaction_term> interactions;
};

/// Stacked comment update replacing the per-system rules: entry j updates
/// system j's comment from the (theta, omega, v) triples of the systems it
/// declares to read (the dependency graph), plus system j's own family
/// parameters.
struct synthesis_rule {
  struct entry {
    std::vector<int> reads;  // system indices, ascending, duplicates rejected
    std::vector<expr> update;
  };
  std::vector<entry> entries;
};

/// A bundle whose comments update by one synthesis rule.
struct unified_system {
  system_bundle bundle;
  synthesis_rule rule;
};

/// Per-system seed used inside a bundle run. Exposed so an independent
/// single-system run can reproduce one bundle member exactly.
std::uint64_t bundle_system_seed(std::uint64_t bundle_seed, int system_index);

/// Builds a two-system bundle with additive interaction terms. The two
/// specs must declare alignable window schedules: identical fixed
/// partitions. (Transition-driven bundles are built directly with a
/// schedule over the stacked hidden components.)
system_bundle couple_comments(const tactical_game& a, const tactical_game& b,
                              std::vector<interaction_term> terms);

/// Validates the dependency graph and binds the rule to the bundle.
unified_system synthesize_comments(const system_bundle& bundle, synthesis_rule rule);

/// Runs a bundle with its systems' own comment rules plus any interaction
/// terms. All systems share window boundaries; comment updates for window n
/// read only window-(n-1) comments of every system.
std::vector<tactical_trace> run_coupled(const system_bundle& bundle,
                                        const run_options& opts = {});

/// Runs a unified system: same loop, with the synthesis rule producing the
/// stacked comment update.
std::vector<tactical_trace> run_unified(const unified_system& u, const run_options& opts = {});

/// One probe configuration for localization: optional initial-state
/// overrides (one per system; empty vector keeps the scenario states) and
/// run options.
struct probe_scenario {
  std::vector<vec> phi0;  // empty, or one initial state per system
  run_options run;
};

/// Candidate decomposition: partition of the system indices into blocks.
struct localization_candidate {
  std::vector<std::vector<int>> blocks;
};

struct localization_result {
  int chosen = -1;
  std::vector<std::vector<int>> blocks;
  double reconstruction_error = 0.0;
  std::vector<double> candidate_errors;       // aligned with the candidate list
  std::vector<int> cross_block_dependencies;  // rule edges split by each candidate
};

/// Fits, for every candidate partition, one affine comment update per block
/// (inputs: the block's previous comments and current window values) by
/// least squares over the probe runs, then scores the candidate by chained
/// replay: comments reconstructed block-locally from the observed window
/// streams, error = max deviation from the true comments. Returns the
/// candidate with the smallest error; ties prefer fewer rule dependencies
/// crossing block boundaries, then the earlier candidate.
localization_result localize_system(const unified_system& u,
                                    const std::vector<localization_candidate>& candidates,
                                    const std::vector<probe_scenario>& probes,
                                    const run_options& opts = {});

}  // namespace tactica
