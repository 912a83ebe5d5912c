#include "tactica/verbalization.hpp"

#include <cmath>
#include <string>

#include "runloop.hpp"
#include "tactica/errors.hpp"
#include "tactica/layouts.hpp"

namespace tactica {

std::vector<int> label_nodes(const cell_complex& complex, const trajectory& tr,
                             double hysteresis) {
  if (complex.cells.empty()) throw contract_error("labeling: cell complex has no cells");
  if (tr.nodes() == 0) throw contract_error("labeling: empty trajectory");
  int D = static_cast<int>(tr.hidden[0].size());
  if (complex.ambient_dim != D)
    throw contract_error("labeling: cell complex dimension does not match the hidden stream");
  if (hysteresis < 0.0) throw contract_error("labeling: hysteresis must be nonnegative");

  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(tr.nodes()));
  std::vector<double> slots(static_cast<std::size_t>(D));
  int prev = -1;
  for (long k = 0; k < tr.nodes(); ++k) {
    for (int j = 0; j < D; ++j)
      slots[static_cast<std::size_t>(j)] = tr.hidden[static_cast<std::size_t>(k)][j];
    prev = detail::sticky_label(complex, hysteresis, slots, prev,
                                tr.times[static_cast<std::size_t>(k)]);
    labels.push_back(prev);
  }
  return labels;
}

std::vector<double> segment_by_cells(const cell_complex& complex, const trajectory& tr,
                                     double hysteresis) {
  std::vector<int> labels = label_nodes(complex, tr, hysteresis);
  std::vector<double> partition;
  partition.push_back(tr.times.front());
  // A label change at the very last node opens no new window; it is absorbed
  // into the final segment, matching the live run loop.
  for (long k = 1; k + 1 < tr.nodes(); ++k)
    if (labels[static_cast<std::size_t>(k)] != labels[static_cast<std::size_t>(k - 1)])
      partition.push_back(tr.times[static_cast<std::size_t>(k)]);
  partition.push_back(tr.times.back());
  return partition;
}

dialogue_transcript verbalize_trajectory(const trajectory& tr, const cell_complex& complex,
                                         const window_functionals& fs, double hysteresis) {
  std::vector<int> labels = label_nodes(complex, tr, hysteresis);
  dialogue_transcript out;
  out.boundaries.push_back(tr.times.front());
  long start = 0;
  long N = tr.nodes() - 1;
  for (long k = 1; k < N; ++k) {
    if (labels[static_cast<std::size_t>(k)] == labels[static_cast<std::size_t>(k - 1)]) continue;
    // Segment-pure windows: the transition node opens the next window.
    out.windows.push_back(eval_window_functionals(fs, tr, start, k - 1));
    out.boundaries.push_back(tr.times[static_cast<std::size_t>(k)]);
    start = k;
  }
  out.windows.push_back(eval_window_functionals(fs, tr, start, N));
  out.boundaries.push_back(tr.times[static_cast<std::size_t>(N)]);
  return out;
}

namespace {

// Design row for one transition, in basis order.
Eigen::RowVectorXd basis_row(const recurrence_family& family, const window_functionals& fs,
                             const vec& omega_prev, const vec& v, const vec& summary, int count) {
  Eigen::RowVectorXd row(count);
  if (family.affine) {
    long p = 0;
    row[p++] = 1.0;
    for (long j = 0; j < omega_prev.size(); ++j) row[p++] = omega_prev[j];
    for (long j = 0; j < v.size(); ++j) row[p++] = v[j];
    for (long j = 0; j < summary.size(); ++j) row[p++] = summary[j];
  } else {
    std::vector<double> slots(static_cast<std::size_t>(fs.omega_dim() + fs.v_dim() +
                                                        fs.summary_dim()));
    std::size_t q = 0;
    for (long j = 0; j < omega_prev.size(); ++j) slots[q++] = omega_prev[j];
    for (long j = 0; j < v.size(); ++j) slots[q++] = v[j];
    for (long j = 0; j < summary.size(); ++j) slots[q++] = summary[j];
    for (std::size_t b = 0; b < family.basis.size(); ++b)
      row[static_cast<long>(b)] = family.basis[b].eval(slots);
  }
  return row;
}

int basis_count(const recurrence_family& family, const window_functionals& fs) {
  if (!family.affine) return static_cast<int>(family.basis.size());
  return 1 + fs.omega_dim() + fs.v_dim() + fs.summary_dim();
}

std::vector<std::string> basis_labels(const recurrence_family& family,
                                      const window_functionals& fs) {
  std::vector<std::string> names;
  if (family.affine) {
    names.push_back("1");
    for (int j = 0; j < fs.omega_dim(); ++j) names.push_back("omega" + std::to_string(j + 1));
    for (int j = 0; j < fs.v_dim(); ++j) names.push_back("v" + std::to_string(j + 1));
    for (int j = 0; j < fs.summary_dim(); ++j) names.push_back("s" + std::to_string(j + 1));
  } else {
    for (const auto& e : family.basis) names.push_back(e.print());
  }
  return names;
}

}  // namespace

recurrence_model fit_recurrence(const dialogue_transcript& transcript,
                                const recurrence_family& family,
                                const window_functionals& fs) {
  if (!family.affine && family.basis.empty())
    throw contract_error("recurrence fit: declared family has no basis terms");
  int P = basis_count(family, fs);
  int W = transcript.length();
  if (W < P + 1)
    throw contract_error("recurrence fit: " + std::to_string(W) +
                         " windows cannot determine " + std::to_string(P) +
                         " parameters (need at least " + std::to_string(P + 1) + ")");
  int M = fs.omega_dim();
  long rows = W - 1;

  Eigen::MatrixXd A(rows, P);
  Eigen::MatrixXd Y(rows, M);
  for (long n = 1; n < W; ++n) {
    const transcript_window& prev = transcript.windows[static_cast<std::size_t>(n - 1)];
    const transcript_window& cur = transcript.windows[static_cast<std::size_t>(n)];
    A.row(n - 1) = basis_row(family, fs, prev.omega, cur.v, cur.summary, P);
    for (int j = 0; j < M; ++j) Y(n - 1, j) = cur.omega[j];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  recurrence_model model;
  model.basis_names = basis_labels(family, fs);
  model.rank_deficient = qr.rank() < P;
  Eigen::MatrixXd coef = qr.solve(Y);  // P x M
  model.coefficients = coef.transpose();

  Eigen::MatrixXd resid = A * coef - Y;
  model.step_residuals.resize(static_cast<std::size_t>(rows));
  for (long r = 0; r < rows; ++r) {
    double m = resid.row(r).cwiseAbs().maxCoeff();
    model.step_residuals[static_cast<std::size_t>(r)] = m;
    model.max_residual = std::max(model.max_residual, m);
  }
  return model;
}

vec apply_recurrence(const recurrence_model& model, const recurrence_family& family,
                     const window_functionals& fs, const vec& omega_prev, const vec& v,
                     const vec& summary) {
  int P = basis_count(family, fs);
  if (model.coefficients.cols() != P)
    throw contract_error("recurrence apply: model does not match the family");
  Eigen::RowVectorXd row = basis_row(family, fs, omega_prev, v, summary, P);
  return model.coefficients * row.transpose();
}

}  // namespace tactica
