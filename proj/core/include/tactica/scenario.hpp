#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tactica/multisystem.hpp"
#include "tactica/prediction.hpp"
#include "tactica/selforg.hpp"
#include "tactica/verbalization.hpp"

namespace tactica {

inline constexpr std::string_view kScenarioSchema = "tactica/1";

/// Detector thresholds a scenario can override in its [analysis] section.
struct analysis_options {
  double quasirandom_threshold = 0.3;
  double resonance_threshold = 0.8;
  double variation_threshold = 0.1;
  int invariant_depth = 1;
  double invariant_tol = 1e-6;
};

/// The [prediction] section: assumed hidden constants for the baseline
/// layer and the horizon of the endpoint forecast.
struct prediction_section {
  vec assumed;
  double horizon = 0.5;
};

/// A parsed and compiled scenario file. Single-system documents fill
/// `spec`; multi-system documents (any [system k ...] section) fill
/// `systems` instead and may carry synthesis and localization data.
struct scenario_doc {
  bool is_bundle = false;

  tactical_game spec;

  std::optional<theta_family> family;
  std::optional<performance_functional> objective;
  std::optional<recurrence_family> recurrence;
  std::optional<prediction_section> prediction;
  std::vector<expr> virtual_strategies;  // [virtual], stacked hidden order
  analysis_options analysis;

  system_bundle systems;
  std::optional<synthesis_rule> synthesis;
  std::vector<localization_candidate> candidates;
  std::vector<std::uint64_t> probe_seeds;
};

/// Parses a scenario text. Declared constants are substituted into the
/// expressions during parsing. Structural problems (unknown sections or
/// keys, missing requirements, dimension mismatches) raise validation_error
/// with the line number and, for misspelled names, the nearest valid one.
scenario_doc parse_scenario(std::string_view text);

/// Reads and parses a scenario file.
scenario_doc load_scenario(const std::string& path);

/// Canonical text of a compiled scenario: fixed section and key order,
/// expressions printed in canonical form, constants folded in. Parsing the
/// canonical text and serializing again reproduces it byte for byte.
std::string serialize_scenario(const scenario_doc& doc);

/// The scenario as its players see it: engine-side information (hidden
/// maps, the noise seed) stripped, everything else canonical.
std::string player_view_text(const scenario_doc& doc);

/// Content hash of the canonical text, as recorded in manifests.
std::uint64_t scenario_hash(const scenario_doc& doc);

}  // namespace tactica
