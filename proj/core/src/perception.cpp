#include "tactica/perception.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "runloop.hpp"
#include "tactica/errors.hpp"

namespace tactica {

namespace {

struct corr_result {
  double corr = 0.0;
  bool degenerate = false;
};

// Pearson correlation; sequences that are constant to within relative
// precision 1e-12 count as degenerate (their correlation is noise).
corr_result pearson(const double* x, const double* y, std::size_t n) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = x[i] - mx;
    double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  auto flat = [n](double s, double mean) {
    double tol = 1e-12 * std::max(1.0, std::abs(mean));
    return s <= static_cast<double>(n) * tol * tol;
  };
  corr_result r;
  if (flat(sxx, mx) || flat(syy, my)) {
    r.degenerate = true;
    return r;
  }
  r.corr = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  return r;
}

std::string fmt_coef(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

oracle_report analyze_trace(tactical_trace trace, const oracle_options& oopts) {
  const dialogue_transcript& tr = trace.transcript;
  int W = tr.length();
  if (W < 8)
    throw contract_error("oracle: analysis needs at least 8 windows, transcript has " +
                         std::to_string(W));
  int M = static_cast<int>(tr.windows[0].omega.size());
  int V = static_cast<int>(tr.windows[0].v.size());

  oracle_report rep;
  std::vector<double> seq(static_cast<std::size_t>(W));
  for (int i = 0; i < M; ++i) {
    for (int n = 0; n < W; ++n)
      seq[static_cast<std::size_t>(n)] = tr.windows[static_cast<std::size_t>(n)].omega[i];
    rep.omega_quasirandom.push_back(test_quasirandom(seq, oopts.quasirandom_threshold));
  }
  rep.roulette = M >= 1;
  for (const quasirandom_report& q : rep.omega_quasirandom)
    if (!q.quasirandom) rep.roulette = false;

  if (M >= 1 && V >= 1)
    rep.resonance = detect_resonance(trace, oopts.resonance_threshold, oopts.variation_threshold);

  int depth = oopts.invariant_depth;
  int dim = depth * (M + static_cast<int>(trace.comments[0].size()));
  int stacks = W - depth + 1;
  if (dim >= 1 && W >= depth + 2 && stacks >= dim + 1) {
    std::vector<vec> omega_seq, theta_seq;
    omega_seq.reserve(static_cast<std::size_t>(W));
    theta_seq.reserve(static_cast<std::size_t>(W));
    for (int n = 0; n < W; ++n) {
      omega_seq.push_back(tr.windows[static_cast<std::size_t>(n)].omega);
      theta_seq.push_back(trace.comments[static_cast<std::size_t>(n) + 1]);
    }
    rep.invariants = detect_invariants(omega_seq, theta_seq, depth, oopts.invariant_tol);
  }

  rep.trace = std::move(trace);
  return rep;
}

}  // namespace

tactical_trace run_perception_sets(const tactical_game& spec, const run_options& opts) {
  if (spec.schedule.mode != window_schedule::kind::sets)
    throw contract_error("set run: the window schedule must be rule-driven");
  return run_tactical(spec, opts);
}

quasirandom_report test_quasirandom(const std::vector<double>& seq, double threshold) {
  if (seq.size() < 8)
    throw contract_error("quasirandom test: needs at least 8 samples, got " +
                         std::to_string(seq.size()));
  std::size_t n = seq.size() - 1;
  corr_result r = pearson(seq.data(), seq.data() + 1, n);
  quasirandom_report rep;
  rep.lag_correlation = r.corr;
  rep.degenerate = r.degenerate;
  rep.quasirandom = !r.degenerate && std::abs(r.corr) < threshold;
  return rep;
}

resonance_report detect_resonance(const tactical_trace& trace, double corr_threshold,
                                  double variation_threshold) {
  const dialogue_transcript& tr = trace.transcript;
  int W = tr.length();
  if (W < 8)
    throw contract_error("resonance: needs at least 8 windows, transcript has " +
                         std::to_string(W));
  int M = static_cast<int>(tr.windows[0].omega.size());
  int V = static_cast<int>(tr.windows[0].v.size());
  if (M < 1 || V < 1)
    throw contract_error("resonance: needs both a state-side and a control-side stream");

  resonance_report rep;
  rep.correlation.resize(M, V);
  std::vector<double> a(static_cast<std::size_t>(W)), b(static_cast<std::size_t>(W));
  for (int i = 0; i < M; ++i) {
    for (int n = 0; n < W; ++n)
      a[static_cast<std::size_t>(n)] = tr.windows[static_cast<std::size_t>(n)].omega[i];
    for (int j = 0; j < V; ++j) {
      for (int n = 0; n < W; ++n)
        b[static_cast<std::size_t>(n)] = tr.windows[static_cast<std::size_t>(n)].v[j];
      corr_result r = pearson(a.data(), b.data(), static_cast<std::size_t>(W));
      rep.correlation(i, j) = r.degenerate ? 0.0 : r.corr;
    }
  }
  rep.max_abs_correlation = rep.correlation.cwiseAbs().maxCoeff();
  rep.resonant = rep.max_abs_correlation >= corr_threshold;

  // Hidden-parameter drift within each window: total variation of the
  // fastest component, averaged over windows.
  const trajectory& traj = trace.traj;
  long D = traj.hidden.empty() ? 0 : traj.hidden[0].size();
  double acc = 0.0;
  for (const transcript_window& w : tr.windows) {
    double wvar = 0.0;
    for (long c = 0; c < D; ++c) {
      double tv = 0.0;
      for (long k = w.k_begin + 1; k <= w.k_end; ++k)
        tv += std::abs(traj.hidden[static_cast<std::size_t>(k)][c] -
                       traj.hidden[static_cast<std::size_t>(k - 1)][c]);
      wvar = std::max(wvar, tv);
    }
    acc += wvar;
  }
  rep.mean_hidden_variation = acc / static_cast<double>(W);
  rep.timescale_ok = rep.mean_hidden_variation <= variation_threshold;
  return rep;
}

std::vector<oracle_invariant> detect_invariants(const std::vector<vec>& omega,
                                                const std::vector<vec>& theta, int depth,
                                                double tol) {
  if (depth < 1) throw contract_error("invariants: depth must be at least 1");
  if (omega.size() != theta.size())
    throw contract_error("invariants: the window and comment sequences differ in length");
  long n = static_cast<long>(omega.size());
  if (n < depth + 2)
    throw contract_error("invariants: sequence of length " + std::to_string(n) +
                         " supports depth at most " + std::to_string(n - 2));
  long M = omega[0].size();
  long K = theta[0].size();
  for (const vec& w : omega)
    if (w.size() != M) throw contract_error("invariants: ragged window sequence");
  for (const vec& th : theta)
    if (th.size() != K) throw contract_error("invariants: ragged comment sequence");
  long dim = static_cast<long>(depth) * (M + K);
  if (dim < 1) throw contract_error("invariants: both streams are empty");
  long stacks = n - depth + 1;
  if (stacks < dim + 1)
    throw contract_error("invariants: " + std::to_string(stacks) + " stacks cannot falsify " +
                         std::to_string(dim) + "-component relations; need " +
                         std::to_string(dim + 1));

  Eigen::MatrixXd X(stacks, dim);
  for (long e = 0; e < stacks; ++e) {
    long p = 0;
    for (int l = 0; l < depth; ++l) {
      long idx = depth - 1 + e - l;  // newest first
      for (long c = 0; c < M; ++c) X(e, p++) = omega[static_cast<std::size_t>(idx)][c];
      for (long c = 0; c < K; ++c) X(e, p++) = theta[static_cast<std::size_t>(idx)][c];
    }
  }
  Eigen::RowVectorXd mean = X.colwise().mean();
  Eigen::MatrixXd C = X.rowwise() - mean;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeThinV);

  std::vector<oracle_invariant> found;
  for (long i = 0; i < svd.matrixV().cols(); ++i) {
    vec dir = svd.matrixV().col(i);
    double resid = (C * dir).cwiseAbs().maxCoeff();
    if (resid >= tol) continue;

    // Normalize by the first coefficient that carries real weight.
    double maxc = dir.cwiseAbs().maxCoeff();
    long lead = 0;
    while (lead < dim && std::abs(dir[lead]) <= 0.1 * maxc) ++lead;
    double scale = 1.0 / dir[lead];

    oracle_invariant inv;
    inv.coefficients = dir * scale;
    inv.constant = mean.dot(dir) * scale;
    inv.residual = resid * std::abs(scale);

    std::string text;
    long p = 0;
    for (int l = 0; l < depth; ++l) {
      for (long c = 0; c < M + K; ++c, ++p) {
        double coef = inv.coefficients[p];
        if (std::abs(coef) < 1e-8) continue;
        std::string name = (c < M ? "omega" + std::to_string(c + 1)
                                  : "theta" + std::to_string(c - M + 1));
        if (depth > 1) name += l == 0 ? "[n]" : "[n-" + std::to_string(l) + "]";
        if (!text.empty()) text += coef < 0 ? " - " : " + ";
        else if (coef < 0) text += "-";
        text += fmt_coef(std::abs(coef)) + "*" + name;
      }
    }
    if (text.empty()) text = "0";
    inv.description = text + " = " + fmt_coef(inv.constant);
    found.push_back(std::move(inv));
  }
  std::sort(found.begin(), found.end(),
            [](const oracle_invariant& a, const oracle_invariant& b) {
              return a.residual < b.residual;
            });
  return found;
}

oracle_report run_oracle(const tactical_game& spec, const oracle_options& oopts,
                         const run_options& opts) {
  return analyze_trace(run_tactical(spec, opts), oopts);
}

oracle_report run_roulette(const tactical_game& spec, const oracle_options& oopts,
                           const run_options& opts) {
  detail::loop_overrides ovr;
  ovr.freeze_comments = true;
  return analyze_trace(detail::run_windowed(spec, opts, ovr), oopts);
}

}  // namespace tactica
