#pragma once

#include <string>
#include <vector>

#include "tactica/dialogue.hpp"

namespace tactica {

/// Finite list of labeled cells covering the reachable hidden-parameter
/// space. Membership is a comparison predicate over the stacked hidden
/// components; cells must be pairwise disjoint on every sampled point.
struct cell_complex {
  struct cell {
    std::string label;
    predicate membership;
  };
  std::vector<cell> cells;
  int ambient_dim = 0;  // stacked hidden dimension the predicates read
};

/// Cell index per node. Every sample must match exactly one cell; uncovered
/// or doubly-covered samples raise validation_error with the offending time
/// and values. With hysteresis > 0 a label switch is suppressed until the
/// new cell's margin reaches the hysteresis width (labels are sticky).
std::vector<int> label_nodes(const cell_complex& complex, const trajectory& tr,
                             double hysteresis = 0.0);

/// Interior breakpoints: grid times whose node carries a different label
/// than the previous node. The returned partition starts at t_0 and ends at
/// the final time.
std::vector<double> segment_by_cells(const cell_complex& complex, const trajectory& tr,
                                     double hysteresis = 0.0);

/// A-posteriori verbalization: segments the trajectory by cell transitions
/// and reduces the window functionals over each segment. The node at an
/// interior breakpoint opens the next window, so every window's samples
/// carry a single label.
dialogue_transcript verbalize_trajectory(const trajectory& tr, const cell_complex& complex,
                                         const window_functionals& fs, double hysteresis = 0.0);

/// Parametric family fitted over transcript transitions
/// omega_n ~ Omega(omega_{n-1}, v_n; summaries_n). The affine family uses
/// basis {1, omega_{n-1}, v_n, s_n}; a declared family lists custom basis
/// expressions over the same variables. Fitting is linear least squares in
/// the basis coefficients.
struct recurrence_family {
  bool affine = true;
  std::vector<expr> basis;  // used when affine is false
};

struct recurrence_model {
  std::vector<std::string> basis_names;        // printed basis terms
  Eigen::MatrixXd coefficients;                // omega component x basis term
  std::vector<double> step_residuals;          // max-norm residual per transition
  double max_residual = 0.0;
  bool rank_deficient = false;
};

/// Least-squares fit over all consecutive window pairs. Requires transcript
/// length >= parameter count + 1. A degenerate transcript sets the
/// rank-deficiency flag; it is reported, not thrown.
recurrence_model fit_recurrence(const dialogue_transcript& transcript,
                                const recurrence_family& family,
                                const window_functionals& fs);

/// Predicted omega_n from the fitted model for one transition.
vec apply_recurrence(const recurrence_model& model, const recurrence_family& family,
                     const window_functionals& fs, const vec& omega_prev, const vec& v,
                     const vec& summary);

}  // namespace tactica
