#include "tactica/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "tactica/errors.hpp"
#include "tactica/layouts.hpp"
#include "tactica/rng.hpp"

namespace tactica {

namespace {

// ---------------------------------------------------------------------------
// Raw layer: sections of key = value lines, with line numbers for messages.

struct raw_entry {
  std::string key, value;
  int line = 0;
  mutable bool used = false;
};

struct raw_section {
  std::string name;
  int line = 0;
  std::vector<raw_entry> entries;
  mutable bool used = false;
};

struct raw_doc {
  std::vector<raw_entry> top;  // keys before the first section header
  std::vector<raw_section> sections;
};

[[noreturn]] void fail(int line, const std::string& msg) {
  throw validation_error("scenario line " + std::to_string(line) + ": " + msg);
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

raw_doc parse_raw(std::string_view text) {
  raw_doc doc;
  raw_section* cur = nullptr;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                          : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (std::size_t hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') fail(line_no, "unterminated section header");
      std::string name = trim(std::string_view(t).substr(1, t.size() - 2));
      if (name.empty()) fail(line_no, "empty section name");
      for (const raw_section& s : doc.sections)
        if (s.name == name) fail(line_no, "section [" + name + "] appears twice");
      doc.sections.push_back(raw_section{name, line_no, {}, false});
      cur = &doc.sections.back();
      continue;
    }
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      fail(line_no, "expected 'key = value' or a [section] header");
    std::string key = trim(std::string_view(t).substr(0, eq));
    std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) fail(line_no, "missing key before '='");
    raw_entry e{key, value, line_no, false};
    std::vector<raw_entry>& dst = cur ? cur->entries : doc.top;
    for (const raw_entry& prev : dst)
      if (prev.key == key)
        fail(line_no, "key '" + key + "' appears twice in the same section");
    dst.push_back(std::move(e));
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Typed access to one section.

const raw_entry* find_entry(const raw_section* s, const std::string& key) {
  if (!s) return nullptr;
  for (const raw_entry& e : s->entries)
    if (e.key == key) {
      e.used = true;
      return &e;
    }
  return nullptr;
}

const raw_entry& need_entry(const raw_section& s, const std::string& key) {
  if (const raw_entry* e = find_entry(&s, key)) return *e;
  fail(s.line, "section [" + s.name + "] is missing the required key '" + key + "'");
}

// Constant-foldable scalar: a full expression with no free variables.
double num_value(const raw_entry& e, const constant_table& consts) {
  symbol_table none;
  expr ex = parse_expression(e.value, none, consts,
                             "line " + std::to_string(e.line) + ", key '" + e.key + "'");
  double v = ex.eval({});
  if (!std::isfinite(v)) fail(e.line, "key '" + e.key + "' is not a finite number");
  return v;
}

long int_value(const raw_entry& e, const constant_table& consts, long lo, long hi) {
  double v = num_value(e, consts);
  if (v != std::rint(v)) fail(e.line, "key '" + e.key + "' must be an integer");
  long n = static_cast<long>(std::llrint(v));
  if (n < lo || n > hi)
    fail(e.line, "key '" + e.key + "' is out of range");
  return n;
}

bool bool_value(const raw_entry& e) {
  if (e.value == "true") return true;
  if (e.value == "false") return false;
  fail(e.line, "key '" + e.key + "' must be true or false");
}

std::uint64_t seed_value(const raw_entry& e) {
  const std::string& s = e.value;
  if (s.empty() || !std::all_of(s.begin(), s.end(),
                                [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    fail(e.line, "key '" + e.key + "' must be a nonnegative integer");
  errno = 0;
  char* end = nullptr;
  std::uint64_t v = std::strtoull(s.c_str(), &end, 10);
  if (errno != 0 || end != s.c_str() + s.size())
    fail(e.line, "key '" + e.key + "' is not a valid 64-bit seed");
  return v;
}

vec list_value(const raw_entry& e, const constant_table& consts) {
  std::vector<std::string> toks = split_ws(e.value);
  vec out(static_cast<long>(toks.size()));
  symbol_table none;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    expr ex = parse_expression(toks[i], none, consts,
                               "line " + std::to_string(e.line) + ", key '" + e.key + "'");
    out[static_cast<long>(i)] = ex.eval({});
    if (!std::isfinite(out[static_cast<long>(i)]))
      fail(e.line, "key '" + e.key + "' has a non-finite element");
  }
  return out;
}

std::string where_of(const raw_entry& e) {
  return "line " + std::to_string(e.line) + ", key '" + e.key + "'";
}

// After compiling a section, every entry must have been consumed.
void check_used(const raw_section& s, const std::vector<std::string>& known) {
  for (const raw_entry& e : s.entries) {
    if (e.used) continue;
    std::string msg = "unknown key '" + e.key + "' in section [" + s.name + "]";
    std::string near = nearest_name(e.key, known);
    if (!near.empty()) msg += "; did you mean '" + near + "'?";
    fail(e.line, msg);
  }
}

// Indexed key family prefix1, prefix2, ...: returns how many consecutive
// indices from 1 are present (the gap check falls out of check_used).
int count_indexed(const raw_section* s, const std::string& prefix) {
  int n = 0;
  while (find_entry(s, prefix + std::to_string(n + 1))) ++n;
  // find_entry marked them used; re-fetch later via find_entry again.
  return n;
}

// ---------------------------------------------------------------------------
// Section registry for one compile scope (a whole document, or one system
// of a bundle).

struct scope {
  std::vector<raw_section*> sections;

  raw_section* find(const std::string& name) const {
    for (raw_section* s : sections)
      if (s->name == name) {
        s->used = true;
        return s;
      }
    return nullptr;
  }
  std::vector<raw_section*> find_indexed(const std::string& prefix, const char* what) const {
    std::vector<raw_section*> out;
    for (int i = 1;; ++i) {
      raw_section* s = find(prefix + " " + std::to_string(i));
      if (!s) break;
      out.push_back(s);
    }
    for (raw_section* s : sections)
      if (!s->used && s->name.rfind(prefix + " ", 0) == 0)
        fail(s->line, std::string(what) + " sections must be numbered consecutively from 1");
    return out;
  }
};

struct run_params {
  double t0 = 0.0, h = 1e-3, horizon = 1.0;
  std::uint64_t seed = 0;
};

// State component names "phi1 phi2 ..." or "xi1 ...": returns (name, count).
std::pair<std::string, int> parse_state_names(const raw_entry& e) {
  std::vector<std::string> toks = split_ws(e.value);
  if (toks.empty()) fail(e.line, "state declaration is empty");
  std::string prefix;
  for (const char* cand : {"phi", "xi"})
    if (toks[0].rfind(cand, 0) == 0) prefix = cand;
  if (prefix.empty())
    fail(e.line, "state components must be named phi1.. or xi1..");
  for (std::size_t i = 0; i < toks.size(); ++i)
    if (toks[i] != prefix + std::to_string(i + 1))
      fail(e.line, "state components must be " + prefix + "1, " + prefix +
                       "2, ... in order; got '" + toks[i] + "'");
  return {prefix, static_cast<int>(toks.size())};
}

binding_mode mode_value(const raw_entry& e) {
  if (e.value == "none") return binding_mode::none;
  if (e.value == "known") return binding_mode::known;
  if (e.value == "unknown") return binding_mode::unknown;
  fail(e.line, "key '" + e.key + "' must be none, known or unknown");
}

window_functional functional_value(const raw_entry& e, const symbol_table& symbols,
                                   const constant_table& consts) {
  std::size_t colon = e.value.find(':');
  if (colon == std::string::npos)
    fail(e.line, "window functionals are written 'mean: expr', 'integral: expr' or 'last: expr'");
  std::string red = trim(std::string_view(e.value).substr(0, colon));
  std::string body = trim(std::string_view(e.value).substr(colon + 1));
  window_functional f;
  if (red == "mean")
    f.reduction = window_reduction::mean;
  else if (red == "integral")
    f.reduction = window_reduction::integral;
  else if (red == "last")
    f.reduction = window_reduction::last;
  else
    fail(e.line, "unknown reduction '" + red + "'; use mean, integral or last");
  f.value = parse_expression(body, symbols, consts, where_of(e));
  return f;
}

// ---------------------------------------------------------------------------
// Single-system compiler, shared by plain documents and bundle members.

struct system_compile {
  tactical_game spec;
  layout_dims ld;
};

system_compile compile_system(const scope& sc, const run_params& rp,
                              const constant_table& consts,
                              const std::string& state_name, int d, bool allow_schedule) {
  system_compile out;
  tactical_game& tg = out.spec;
  game& g = tg.base;

  g.state_dim = d;
  g.t0 = rp.t0;
  g.h = rp.h;
  g.horizon = rp.horizon;
  g.seed = rp.seed;
  tg.state_name = state_name;

  // Structure-determining counts come first; expressions are parsed after
  // every dimension is known.
  std::vector<raw_section*> players = sc.find_indexed("player", "player");
  int m = static_cast<int>(players.size());
  if (m < 1) fail(1, "at least one [player 1] section is required");
  std::vector<int> hidden_count(static_cast<std::size_t>(m), 0);
  for (int i = 0; i < m; ++i)
    hidden_count[static_cast<std::size_t>(i)] = count_indexed(players[static_cast<std::size_t>(i)], "hidden");
  int D = 0;
  for (int c : hidden_count) D += c;

  std::vector<raw_section*> coalitions = sc.find_indexed("coalition", "coalition");

  raw_section* lambda_sec = sc.find("lambda");
  int L = count_indexed(lambda_sec, "lambda");

  raw_section* binding_sec = sc.find("binding");
  if (binding_sec) {
    if (const raw_entry* e = find_entry(binding_sec, "feedback"))
      g.binding.feedback = mode_value(*e);
    if (const raw_entry* e = find_entry(binding_sec, "lambda"))
      g.binding.lambda_feedback = mode_value(*e);
    if (const raw_entry* e = find_entry(binding_sec, "evolution")) {
      for (const std::string& tok : split_ws(e->value)) {
        if (tok == "theta")
          g.binding.evolution.theta = true;
        else if (tok == "omega")
          g.binding.evolution.omega = true;
        else
          fail(e->line, "evolution binding lists 'theta' and/or 'omega'; got '" + tok + "'");
      }
    }
    if (const raw_entry* e = find_entry(binding_sec, "omega_visible"))
      tg.omega_visible = bool_value(*e);
    check_used(*binding_sec, {"feedback", "lambda", "evolution", "omega_visible"});
  }

  raw_section* comments_sec = sc.find("comments");
  int K = count_indexed(comments_sec, "theta");
  if (comments_sec && K == 0)
    fail(comments_sec->line, "[comments] declares no theta1.. update");

  raw_section* functionals_sec = sc.find("functionals");
  int M = count_indexed(functionals_sec, "omega");
  int V = count_indexed(functionals_sec, "v");
  int S = count_indexed(functionals_sec, "s");

  layout_dims& ld = out.ld;
  ld.state_dim = d;
  ld.players = m;
  ld.channels = coalitions.empty() ? m : static_cast<int>(coalitions.size());
  ld.hidden_total = D;
  ld.theta_dim = K;
  ld.omega_dim = M;
  ld.v_dim = V;
  ld.lambda_dim = L;
  ld.summary_dim = S;
  ld.state_name = state_name;

  // [state]
  raw_section* state_sec = sc.find("state");
  if (!state_sec) fail(1, "a [state] section with the initial state is required");
  g.phi0 = vec(d);
  std::vector<std::string> state_keys;
  for (int j = 0; j < d; ++j) {
    std::string key = state_name + std::to_string(j + 1);
    state_keys.push_back(key);
    g.phi0[j] = num_value(need_entry(*state_sec, key), consts);
  }
  check_used(*state_sec, state_keys);

  // [dynamics]
  raw_section* dyn_sec = sc.find("dynamics");
  if (!dyn_sec) fail(1, "a [dynamics] section is required");
  symbol_table dyn_syms =
      dynamics_symbols(ld, g.binding.evolution.theta, g.binding.evolution.omega);
  std::vector<std::string> dyn_keys;
  for (int j = 0; j < d; ++j) {
    std::string key = state_name + std::to_string(j + 1) + "'";
    dyn_keys.push_back(key);
    const raw_entry& e = need_entry(*dyn_sec, key);
    g.dynamics.push_back(parse_expression(e.value, dyn_syms, consts, where_of(e)));
  }
  check_used(*dyn_sec, dyn_keys);

  // [player i]
  symbol_table ctl_syms = control_symbols(ld, tg.omega_visible);
  for (int i = 0; i < m; ++i) {
    raw_section& ps = *players[static_cast<std::size_t>(i)];
    int di = hidden_count[static_cast<std::size_t>(i)];
    pure_control_signal ctl;
    const raw_entry& se = need_entry(ps, "strategy");
    ctl.strategy = parse_expression(se.value, ctl_syms, consts, where_of(se));
    if (const raw_entry* e = find_entry(&ps, "lower")) ctl.lower = num_value(*e, consts);
    if (const raw_entry* e = find_entry(&ps, "upper")) ctl.upper = num_value(*e, consts);
    g.controls.push_back(std::move(ctl));

    feedback_law fb;
    symbol_table cpl_syms = coupling_symbols(ld, i, di, g.binding.feedback == binding_mode::known,
                                             g.binding.lambda_feedback == binding_mode::known);
    const raw_entry& ce = need_entry(ps, "coupling");
    fb.coupling = parse_expression(ce.value, cpl_syms, consts, where_of(ce));
    symbol_table hid_syms = hidden_symbols(ld, i, g.binding.feedback == binding_mode::unknown,
                                           g.binding.lambda_feedback == binding_mode::unknown);
    std::vector<std::string> known = {"strategy", "lower", "upper", "coupling"};
    for (int j = 0; j < di; ++j) {
      std::string key = "hidden" + std::to_string(j + 1);
      known.push_back(key);
      const raw_entry& he = need_entry(ps, key);
      fb.hidden.push_back(parse_expression(he.value, hid_syms, consts, where_of(he)));
    }
    g.feedbacks.push_back(std::move(fb));
    check_used(ps, known);
  }

  // [coalition j]
  if (!coalitions.empty()) {
    coalition_map cm;
    symbol_table agg_syms = aggregator_symbols(ld);
    for (raw_section* cs : coalitions) {
      coalition grp;
      const raw_entry& me = need_entry(*cs, "members");
      for (const std::string& tok : split_ws(me.value)) {
        long idx = 0;
        try {
          idx = std::stol(tok);
        } catch (...) {
          fail(me.line, "members must be player indices");
        }
        if (idx < 1 || idx > m)
          fail(me.line, "member " + tok + " is not a player (1.." + std::to_string(m) + ")");
        grp.members.push_back(static_cast<int>(idx - 1));
      }
      if (const raw_entry* e = find_entry(cs, "aggregator"))
        grp.aggregator = parse_expression(e->value, agg_syms, consts, where_of(*e));
      cm.groups.push_back(std::move(grp));
      check_used(*cs, {"members", "aggregator"});
    }
    g.coalitions = std::move(cm);
  }

  // [lambda]
  if (lambda_sec) {
    symbol_table lam_syms = lambda_symbols();
    std::vector<std::string> keys;
    for (int l = 0; l < L; ++l) {
      std::string key = "lambda" + std::to_string(l + 1);
      keys.push_back(key);
      const raw_entry& e = need_entry(*lambda_sec, key);
      g.lambda_schedule.push_back(parse_expression(e.value, lam_syms, consts, where_of(e)));
    }
    check_used(*lambda_sec, keys);
  }

  // [functionals]
  if (functionals_sec) {
    std::vector<std::string> keys = {"source", "omega_init"};
    if (const raw_entry* e = find_entry(functionals_sec, "source")) {
      if (e->value == "state")
        tg.functionals.source = stream_source::state;
      else if (e->value == "intention")
        tg.functionals.source = stream_source::intention;
      else
        fail(e->line, "source must be state or intention");
    }
    symbol_table ssyms = state_functional_symbols(ld);
    symbol_table csyms = control_functional_symbols(ld);
    symbol_table msyms = summary_symbols(ld);
    for (int i = 0; i < M; ++i) {
      std::string key = "omega" + std::to_string(i + 1);
      keys.push_back(key);
      tg.functionals.omega.push_back(
          functional_value(need_entry(*functionals_sec, key), ssyms, consts));
    }
    for (int i = 0; i < V; ++i) {
      std::string key = "v" + std::to_string(i + 1);
      keys.push_back(key);
      tg.functionals.v.push_back(
          functional_value(need_entry(*functionals_sec, key), csyms, consts));
    }
    for (int i = 0; i < S; ++i) {
      std::string key = "s" + std::to_string(i + 1);
      keys.push_back(key);
      tg.functionals.summaries.push_back(
          functional_value(need_entry(*functionals_sec, key), msyms, consts));
    }
    if (const raw_entry* e = find_entry(functionals_sec, "omega_init")) {
      tg.functionals.omega_init = list_value(*e, consts);
      if (tg.functionals.omega_init.size() != M)
        fail(e->line, "omega_init needs " + std::to_string(M) + " values");
    }
    check_used(*functionals_sec, keys);
  }

  // [comments]
  if (comments_sec) {
    if (const raw_entry* e = find_entry(comments_sec, "params"))
      tg.params = list_value(*e, consts);
    ld.param_dim = static_cast<int>(tg.params.size());
    symbol_table cmt_syms = comment_symbols(ld);
    comment_rule rule;
    rule.init = vec::Zero(K);
    std::vector<std::string> keys = {"params"};
    for (int i = 0; i < K; ++i) {
      std::string key = "theta" + std::to_string(i + 1);
      keys.push_back(key);
      keys.push_back(key + "_init");
      const raw_entry& e = need_entry(*comments_sec, key);
      rule.update.push_back(parse_expression(e.value, cmt_syms, consts, where_of(e)));
      if (const raw_entry* ie = find_entry(comments_sec, key + "_init"))
        rule.init[i] = num_value(*ie, consts);
    }
    tg.comments = std::move(rule);
    check_used(*comments_sec, keys);
  }

  // [invariants]
  if (raw_section* is = sc.find("invariants")) {
    symbol_table inv_syms = invariant_symbols(ld);
    std::vector<std::string> keys;
    for (const raw_entry& e : is->entries) {
      if (e.key.size() > 4 && e.key.rfind("_tol") == e.key.size() - 4) continue;
      e.used = true;
      keys.push_back(e.key);
      invariant_functional inv;
      inv.name = e.key;
      inv.value = parse_expression(e.value, inv_syms, consts, where_of(e));
      if (const raw_entry* te = find_entry(is, e.key + "_tol")) {
        keys.push_back(e.key + "_tol");
        inv.tolerance = num_value(*te, consts);
        if (!(inv.tolerance > 0.0)) fail(te->line, "tolerance must be positive");
      }
      g.invariants.push_back(std::move(inv));
    }
    check_used(*is, keys);
  }

  // Window schedule: [cells] | [partition] | [termination], at most one.
  if (allow_schedule) {
    raw_section* cells_sec = sc.find("cells");
    raw_section* part_sec = sc.find("partition");
    raw_section* term_sec = sc.find("termination");
    int declared = (cells_sec != nullptr) + (part_sec != nullptr) + (term_sec != nullptr);
    if (declared > 1)
      fail(cells_sec ? cells_sec->line : part_sec->line,
           "declare at most one of [cells], [partition], [termination]");
    if (cells_sec) {
      tg.schedule.mode = window_schedule::kind::cells;
      cell_complex cx;
      cx.ambient_dim = D;
      symbol_table cell_syms = cell_symbols(ld);
      std::vector<std::string> keys = {"hysteresis"};
      if (const raw_entry* e = find_entry(cells_sec, "hysteresis")) {
        tg.schedule.hysteresis = num_value(*e, consts);
        if (tg.schedule.hysteresis < 0.0) fail(e->line, "hysteresis must be nonnegative");
      }
      for (const raw_entry& e : cells_sec->entries) {
        if (e.used) continue;
        e.used = true;
        keys.push_back(e.key);
        cx.cells.push_back(cell_complex::cell{
            e.key, parse_predicate(e.value, cell_syms, consts, where_of(e))});
      }
      if (cx.cells.empty()) fail(cells_sec->line, "[cells] declares no cells");
      tg.schedule.complex = std::move(cx);
      check_used(*cells_sec, keys);
    } else if (part_sec) {
      tg.schedule.mode = window_schedule::kind::fixed;
      const raw_entry* we = find_entry(part_sec, "windows");
      const raw_entry* te = find_entry(part_sec, "times");
      if (!!we == !!te)
        fail(part_sec->line, "[partition] needs exactly one of 'windows' or 'times'");
      if (we)
        tg.schedule.partition.uniform_windows =
            static_cast<int>(int_value(*we, consts, 1, 1000000000L));
      else {
        vec ts = list_value(*te, consts);
        if (ts.size() == 0) fail(te->line, "'times' lists at least one boundary");
        for (long j = 0; j < ts.size(); ++j) tg.schedule.partition.times.push_back(ts[j]);
      }
      check_used(*part_sec, {"windows", "times"});
    } else if (term_sec) {
      tg.schedule.mode = window_schedule::kind::sets;
      set_termination_rule rule;
      symbol_table term_syms = termination_symbols(ld);
      const raw_entry& re = need_entry(*term_sec, "rule");
      rule.rule = parse_predicate(re.value, term_syms, consts, where_of(re));
      if (const raw_entry* ge = find_entry(term_sec, "guard")) {
        if (ge->value == "inf")
          rule.guard = std::numeric_limits<double>::infinity();
        else {
          rule.guard = num_value(*ge, consts);
          if (!(rule.guard > 0.0)) fail(ge->line, "guard must be positive");
        }
      }
      tg.schedule.termination = std::move(rule);
      check_used(*term_sec, {"rule", "guard"});
    }
    if (tg.schedule.mode != window_schedule::kind::none && M < 1)
      fail(1, "a windowed run needs at least one omega functional");
  }

  return out;
}

// ---------------------------------------------------------------------------
// Document-level sections shared by simulate/analysis tooling.

void compile_extras(scenario_doc& doc, const scope& sc, const constant_table& consts,
                    const layout_dims& base_ld) {
  layout_dims ld = base_ld;

  if (raw_section* os = sc.find("objective")) {
    symbol_table osyms = objective_symbols(ld);
    performance_functional J;
    if (const raw_entry* e = find_entry(os, "integrand"))
      J.integrand = parse_expression(e->value, osyms, consts, where_of(*e));
    if (const raw_entry* e = find_entry(os, "terminal"))
      J.terminal = parse_expression(e->value, osyms, consts, where_of(*e));
    if (J.integrand.empty() && J.terminal.empty())
      fail(os->line, "[objective] needs an integrand and/or a terminal term");
    doc.objective = std::move(J);
    check_used(*os, {"integrand", "terminal"});
  }

  if (raw_section* fs = sc.find("family")) {
    if (ld.theta_dim < 1) fail(fs->line, "[family] needs a [comments] rule to parametrize");
    theta_family fam;
    fam.lower = list_value(need_entry(*fs, "lower"), consts);
    fam.upper = list_value(need_entry(*fs, "upper"), consts);
    if (fam.lower.size() != fam.upper.size())
      fail(fs->line, "family lower and upper bounds differ in size");
    if (fam.lower.size() == 0) fail(fs->line, "family has no parameters");
    layout_dims fld = ld;
    fld.param_dim = fam.param_dim();
    symbol_table fsyms = comment_symbols(fld);
    fam.rule.init = doc.spec.comments->init;
    std::vector<std::string> keys = {"lower", "upper"};
    for (int i = 0; i < ld.theta_dim; ++i) {
      std::string key = "theta" + std::to_string(i + 1);
      keys.push_back(key);
      const raw_entry& e = need_entry(*fs, key);
      fam.rule.update.push_back(parse_expression(e.value, fsyms, consts, where_of(e)));
    }
    doc.family = std::move(fam);
    check_used(*fs, keys);
  }

  if (raw_section* rs = sc.find("recurrence")) {
    recurrence_family fam;
    if (const raw_entry* e = find_entry(rs, "affine")) fam.affine = bool_value(*e);
    if (const raw_entry* e = find_entry(rs, "basis")) {
      if (fam.affine)
        fail(e->line, "an affine recurrence family does not take basis terms");
      symbol_table rsyms = recurrence_symbols(ld);
      std::stringstream ss(e->value);
      std::string term;
      while (std::getline(ss, term, '|')) {
        std::string t = trim(term);
        if (t.empty()) fail(e->line, "empty basis term");
        fam.basis.push_back(parse_expression(t, rsyms, consts, where_of(*e)));
      }
      if (fam.basis.empty()) fail(e->line, "basis lists at least one term");
    } else if (!fam.affine) {
      fail(rs->line, "a custom recurrence family needs 'basis'");
    }
    doc.recurrence = std::move(fam);
    check_used(*rs, {"affine", "basis"});
  }

  if (raw_section* ps = sc.find("prediction")) {
    prediction_section pred;
    pred.assumed = vec::Zero(ld.hidden_total);
    if (const raw_entry* e = find_entry(ps, "assumed")) {
      pred.assumed = list_value(*e, consts);
      if (pred.assumed.size() != ld.hidden_total)
        fail(e->line, "assumed needs one value per hidden component (" +
                          std::to_string(ld.hidden_total) + ")");
    }
    if (const raw_entry* e = find_entry(ps, "horizon")) {
      pred.horizon = num_value(*e, consts);
      if (!(pred.horizon > 0.0)) fail(e->line, "prediction horizon must be positive");
    }
    doc.prediction = std::move(pred);
    check_used(*ps, {"assumed", "horizon"});
  }

  if (raw_section* vs = sc.find("virtual")) {
    symbol_table vsyms = virtual_symbols(ld);
    std::vector<std::string> keys;
    for (int c = 0; c < ld.hidden_total; ++c) {
      std::string key = "eps" + std::to_string(c + 1);
      keys.push_back(key);
      const raw_entry& e = need_entry(*vs, key);
      doc.virtual_strategies.push_back(parse_expression(e.value, vsyms, consts, where_of(e)));
    }
    if (ld.hidden_total == 0) fail(vs->line, "[virtual] needs hidden components to замещать");
    check_used(*vs, keys);
  }

  if (raw_section* as = sc.find("analysis")) {
    if (const raw_entry* e = find_entry(as, "quasirandom_threshold"))
      doc.analysis.quasirandom_threshold = num_value(*e, consts);
    if (const raw_entry* e = find_entry(as, "resonance_threshold"))
      doc.analysis.resonance_threshold = num_value(*e, consts);
    if (const raw_entry* e = find_entry(as, "variation_threshold"))
      doc.analysis.variation_threshold = num_value(*e, consts);
    if (const raw_entry* e = find_entry(as, "invariant_depth"))
      doc.analysis.invariant_depth = static_cast<int>(int_value(*e, consts, 1, 64));
    if (const raw_entry* e = find_entry(as, "invariant_tol"))
      doc.analysis.invariant_tol = num_value(*e, consts);
    check_used(*as, {"quasirandom_threshold", "resonance_threshold", "variation_threshold",
                     "invariant_depth", "invariant_tol"});
  }
}

constant_table compile_constants(const scope& sc) {
  constant_table consts;
  if (raw_section* cs = sc.find("constants")) {
    for (const raw_entry& e : cs->entries) {
      e.used = true;
      // Constants may reference earlier constants.
      consts.values.emplace_back(e.key, num_value(e, consts));
    }
  }
  return consts;
}

run_params compile_run(const raw_section& rs, const constant_table& consts,
                       std::vector<std::string>& known) {
  run_params rp;
  known.insert(known.end(), {"t0", "step", "horizon", "seed"});
  if (const raw_entry* e = find_entry(&rs, "t0")) rp.t0 = num_value(*e, consts);
  if (const raw_entry* e = find_entry(&rs, "step")) {
    rp.h = num_value(*e, consts);
    if (!(rp.h > 0.0)) fail(e->line, "step must be positive");
  }
  if (const raw_entry* e = find_entry(&rs, "horizon")) {
    rp.horizon = num_value(*e, consts);
    if (!(rp.horizon > 0.0)) fail(e->line, "horizon must be positive");
  }
  if (const raw_entry* e = find_entry(&rs, "seed")) rp.seed = seed_value(*e);
  return rp;
}

const std::vector<std::string> kSingleSections = {
    "run",        "constants", "state",      "dynamics",   "binding",  "lambda",
    "cells",      "partition", "termination", "functionals", "comments", "invariants",
    "objective",  "family",    "recurrence", "prediction", "virtual",  "analysis",
    "player N",   "coalition N"};

const std::vector<std::string> kBundleSections = {
    "run",       "constants",    "schedule", "interaction N",
    "synthesis N", "localization", "analysis", "system K ..."};

void check_sections_used(const raw_doc& raw, bool bundle) {
  for (const raw_section& s : raw.sections) {
    if (s.used) continue;
    std::string msg = "unknown section [" + s.name + "]";
    std::vector<std::string> cands;
    for (const std::string& c : (bundle ? kBundleSections : kSingleSections)) {
      std::string base = c.substr(0, c.find(' '));
      cands.push_back(base);
    }
    std::string near = nearest_name(s.name.substr(0, s.name.find(' ')), cands);
    if (!near.empty()) msg += "; did you mean [" + near + "]?";
    fail(s.line, msg);
  }
}

// ---------------------------------------------------------------------------
// Bundle documents.

scenario_doc compile_bundle(raw_doc& raw) {
  scenario_doc doc;
  doc.is_bundle = true;

  scope top;
  for (raw_section& s : raw.sections) top.sections.push_back(&s);

  constant_table consts = compile_constants(top);

  raw_section* run_sec = top.find("run");
  if (!run_sec) fail(1, "a [run] section is required");
  std::vector<std::string> run_keys;
  run_params rp = compile_run(*run_sec, consts, run_keys);
  check_used(*run_sec, run_keys);

  // Group "system k ..." sections per system; strip the prefix so the
  // single-system compiler sees plain names.
  std::vector<std::vector<raw_section*>> per_system;
  std::vector<raw_section> renamed;  // storage for прefix-stripped views
  renamed.reserve(raw.sections.size());
  for (raw_section& s : raw.sections) {
    if (s.name.rfind("system ", 0) != 0) continue;
    s.used = true;
    std::string rest = s.name.substr(7);
    std::size_t sp = rest.find(' ');
    std::string idx_tok = sp == std::string::npos ? rest : rest.substr(0, sp);
    std::string inner = sp == std::string::npos ? std::string() : trim(rest.substr(sp + 1));
    long idx = 0;
    try {
      idx = std::stol(idx_tok);
    } catch (...) {
      fail(s.line, "system sections are [system <index> <name>]");
    }
    if (idx < 1 || idx > 512) fail(s.line, "system index out of range");
    if (inner.empty()) fail(s.line, "system sections are [system <index> <name>]");
    if (static_cast<std::size_t>(idx) > per_system.size())
      per_system.resize(static_cast<std::size_t>(idx));
    renamed.push_back(raw_section{inner, s.line, s.entries, false});
    per_system[static_cast<std::size_t>(idx - 1)].push_back(&renamed.back());
  }
  int S = static_cast<int>(per_system.size());
  if (S < 1) fail(1, "a bundle document needs [system 1 ...] sections");
  for (int j = 0; j < S; ++j)
    if (per_system[static_cast<std::size_t>(j)].empty())
      fail(1, "system indices must be consecutive; system " + std::to_string(j + 1) +
                  " has no sections");

  std::vector<layout_dims> lds;
  for (int j = 0; j < S; ++j) {
    scope ssc;
    ssc.sections = per_system[static_cast<std::size_t>(j)];
    raw_section* srun = ssc.find("run");
    if (!srun)
      fail(1, "system " + std::to_string(j + 1) + " needs a [system " + std::to_string(j + 1) +
                  " run] section naming its state");
    auto [sname, sd] = parse_state_names(need_entry(*srun, "state"));
    check_used(*srun, {"state"});
    run_params srp = rp;
    srp.seed = 0;  // member seeds derive from the bundle seed at run time
    system_compile scm = compile_system(ssc, srp, consts, sname, sd, false);
    for (raw_section* s : ssc.sections)
      if (!s->used)
        fail(s->line, "section [" + s->name + "] is not allowed inside a bundle system");
    doc.systems.systems.push_back(std::move(scm.spec));
    lds.push_back(scm.ld);
  }
  int D_total = 0;
  for (const layout_dims& l : lds) D_total += l.hidden_total;

  // [schedule]
  raw_section* sched = top.find("schedule");
  if (!sched) fail(1, "a bundle needs a [schedule] section");
  const raw_entry* we = find_entry(sched, "windows");
  const raw_entry* te = find_entry(sched, "times");
  if (we || te) {
    if (we && te) fail(sched->line, "[schedule] takes 'windows' or 'times', not both");
    doc.systems.schedule.mode = window_schedule::kind::fixed;
    if (we)
      doc.systems.schedule.partition.uniform_windows =
          static_cast<int>(int_value(*we, consts, 1, 1000000000L));
    else {
      vec ts = list_value(*te, consts);
      if (ts.size() == 0) fail(te->line, "'times' lists at least one boundary");
      for (long q = 0; q < ts.size(); ++q) doc.systems.schedule.partition.times.push_back(ts[q]);
    }
    check_used(*sched, {"windows", "times"});
  } else {
    doc.systems.schedule.mode = window_schedule::kind::cells;
    cell_complex cx;
    cx.ambient_dim = D_total;
    layout_dims cell_ld;
    cell_ld.hidden_total = D_total;
    symbol_table cell_syms = cell_symbols(cell_ld);
    std::vector<std::string> keys = {"hysteresis"};
    if (const raw_entry* e = find_entry(sched, "hysteresis")) {
      doc.systems.schedule.hysteresis = num_value(*e, consts);
      if (doc.systems.schedule.hysteresis < 0.0) fail(e->line, "hysteresis must be nonnegative");
    }
    for (const raw_entry& e : sched->entries) {
      if (e.used) continue;
      e.used = true;
      keys.push_back(e.key);
      cx.cells.push_back(
          cell_complex::cell{e.key, parse_predicate(e.value, cell_syms, consts, where_of(e))});
    }
    if (cx.cells.empty())
      fail(sched->line, "[schedule] needs 'windows', 'times' or cell predicates");
    doc.systems.schedule.complex = std::move(cx);
    check_used(*sched, keys);
  }

  // [interaction k]
  for (raw_section* is : top.find_indexed("interaction", "interaction")) {
    interaction_term term;
    term.self = static_cast<int>(int_value(need_entry(*is, "self"), consts, 1, S)) - 1;
    term.other = static_cast<int>(int_value(need_entry(*is, "other"), consts, 1, S)) - 1;
    if (term.self == term.other) fail(is->line, "an interaction connects two distinct systems");
    symbol_table isyms = interaction_symbols(lds[static_cast<std::size_t>(term.self)],
                                             lds[static_cast<std::size_t>(term.other)]);
    int K = lds[static_cast<std::size_t>(term.self)].theta_dim;
    if (K < 1)
      fail(is->line, "system " + std::to_string(term.self + 1) + " has no comments to correct");
    std::vector<std::string> keys = {"self", "other"};
    for (int cdx = 0; cdx < K; ++cdx) {
      std::string key = "theta" + std::to_string(cdx + 1);
      keys.push_back(key);
      const raw_entry& e = need_entry(*is, key);
      term.update.push_back(parse_expression(e.value, isyms, consts, where_of(e)));
    }
    doc.systems.interactions.push_back(std::move(term));
    check_used(*is, keys);
  }

  // [synthesis k]
  std::vector<raw_section*> synth = top.find_indexed("synthesis", "synthesis");
  if (!synth.empty()) {
    synthesis_rule rule;
    rule.entries.resize(static_cast<std::size_t>(S));
    if (static_cast<int>(synth.size()) > S)
      fail(synth.back()->line, "more [synthesis k] sections than systems");
    for (std::size_t si = 0; si < synth.size(); ++si) {
      raw_section* ss = synth[si];
      int j = static_cast<int>(si);
      synthesis_rule::entry& entry = rule.entries[static_cast<std::size_t>(j)];
      const raw_entry& re = need_entry(*ss, "reads");
      int prev = 0;
      for (const std::string& tok : split_ws(re.value)) {
        long r = 0;
        try {
          r = std::stol(tok);
        } catch (...) {
          fail(re.line, "reads lists system indices");
        }
        if (r < 1 || r > S) fail(re.line, "system " + tok + " does not exist");
        if (r <= prev) fail(re.line, "reads must be ascending without repeats");
        entry.reads.push_back(static_cast<int>(r - 1));
        prev = static_cast<int>(r);
      }
      symbol_table ssyms = synthesis_symbols(entry.reads, lds, j);
      int K = lds[static_cast<std::size_t>(j)].theta_dim;
      std::vector<std::string> keys = {"reads"};
      for (int cdx = 0; cdx < K; ++cdx) {
        std::string key = "theta" + std::to_string(cdx + 1);
        keys.push_back(key);
        const raw_entry& e = need_entry(*ss, key);
        entry.update.push_back(parse_expression(e.value, ssyms, consts, where_of(e)));
      }
      check_used(*ss, keys);
    }
    for (int j = 0; j < S; ++j)
      if (lds[static_cast<std::size_t>(j)].theta_dim > 0 &&
          rule.entries[static_cast<std::size_t>(j)].update.empty())
        fail(1, "system " + std::to_string(j + 1) + " has comments but no [synthesis " +
                    std::to_string(j + 1) + "] entry");
    doc.synthesis = std::move(rule);
  }

  // [localization]
  if (raw_section* ls = top.find("localization")) {
    std::vector<std::string> keys = {"probe_seeds"};
    for (int n = 1;; ++n) {
      std::string key = "candidate" + std::to_string(n);
      const raw_entry* e = find_entry(ls, key);
      if (!e) break;
      keys.push_back(key);
      localization_candidate cand;
      std::stringstream ss(e->value);
      std::string blk;
      while (std::getline(ss, blk, '|')) {
        std::vector<int> block;
        for (const std::string& tok : split_ws(blk)) {
          long j = 0;
          try {
            j = std::stol(tok);
          } catch (...) {
            fail(e->line, "candidate blocks list system indices");
          }
          if (j < 1 || j > S) fail(e->line, "system " + tok + " does not exist");
          block.push_back(static_cast<int>(j - 1));
        }
        if (!block.empty()) cand.blocks.push_back(std::move(block));
      }
      if (cand.blocks.empty()) fail(e->line, "candidate partition is empty");
      doc.candidates.push_back(std::move(cand));
    }
    if (const raw_entry* e = find_entry(ls, "probe_seeds")) {
      for (const std::string& tok : split_ws(e->value)) {
        raw_entry tmp{e->key, tok, e->line, true};
        doc.probe_seeds.push_back(seed_value(tmp));
      }
    }
    if (doc.candidates.empty()) fail(ls->line, "[localization] lists no candidates");
    check_used(*ls, keys);
  }

  // [analysis] applies bundle-wide.
  if (raw_section* as = top.find("analysis")) {
    as->used = false;  // re-found below via the shared path
  }
  {
    scope extra;
    for (raw_section& s : raw.sections)
      if (s.name == "analysis") extra.sections.push_back(&s);
    layout_dims dummy;
    compile_extras(doc, extra, consts, dummy);
  }

  check_sections_used(raw, true);
  return doc;
}

scenario_doc compile_single(raw_doc& raw) {
  scenario_doc doc;

  scope sc;
  for (raw_section& s : raw.sections) sc.sections.push_back(&s);

  constant_table consts = compile_constants(sc);

  raw_section* run_sec = sc.find("run");
  if (!run_sec) fail(1, "a [run] section is required");
  auto [state_name, d] = parse_state_names(need_entry(*run_sec, "state"));
  std::vector<std::string> run_keys = {"state"};
  run_params rp = compile_run(*run_sec, consts, run_keys);
  check_used(*run_sec, run_keys);

  system_compile scm = compile_system(sc, rp, consts, state_name, d, true);
  doc.spec = std::move(scm.spec);

  compile_extras(doc, sc, consts, scm.ld);

  check_sections_used(raw, false);
  return doc;
}

}  // namespace

scenario_doc parse_scenario(std::string_view text) {
  raw_doc raw = parse_raw(text);

  const raw_entry* schema = nullptr;
  for (const raw_entry& e : raw.top) {
    if (e.key == "schema") {
      e.used = true;
      schema = &e;
    } else {
      fail(e.line, "only 'schema' may appear before the first section");
    }
  }
  if (!schema) throw validation_error("scenario: missing 'schema = tactica/1' header");
  if (schema->value != kScenarioSchema)
    fail(schema->line, "unsupported schema '" + schema->value + "'; this build reads '" +
                           std::string(kScenarioSchema) + "'");

  bool bundle = false;
  for (const raw_section& s : raw.sections)
    if (s.name.rfind("system ", 0) == 0) bundle = true;
  return bundle ? compile_bundle(raw) : compile_single(raw);
}

scenario_doc load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot read scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

// ---------------------------------------------------------------------------
// Canonical serialization.

namespace {

void emit(std::string& out, const std::string& key, const std::string& value) {
  out += key;
  out += " = ";
  out += value;
  out += "\n";
}

void emit_num(std::string& out, const std::string& key, double v) {
  emit(out, key, format_double(v));
}

std::string list_text(const vec& v) {
  std::string s;
  for (long j = 0; j < v.size(); ++j) {
    if (j) s += " ";
    s += format_double(v[j]);
  }
  return s;
}

std::string reduction_text(const window_functional& f) {
  const char* red = f.reduction == window_reduction::mean      ? "mean"
                    : f.reduction == window_reduction::integral ? "integral"
                                                                : "last";
  return std::string(red) + ": " + f.value.print();
}

std::string section_header(const std::string& prefix, const std::string& name) {
  return "\n[" + prefix + name + "]\n";
}

// Emits one system's sections with an optional "system k " prefix. Strips
// hidden maps when `player_view` is set.
void emit_system(std::string& out, const tactical_game& tg, const std::string& prefix,
                 bool with_run_params, bool player_view) {
  const game& g = tg.base;
  int d = g.state_dim;

  out += section_header(prefix, "run");
  {
    std::string names;
    for (int j = 0; j < d; ++j) {
      if (j) names += " ";
      names += tg.state_name + std::to_string(j + 1);
    }
    emit(out, "state", names);
    if (with_run_params) {
      if (g.t0 != 0.0) emit_num(out, "t0", g.t0);
      emit_num(out, "step", g.h);
      emit_num(out, "horizon", g.horizon);
      if (g.seed != 0 && !player_view) emit(out, "seed", std::to_string(g.seed));
    }
  }

  out += section_header(prefix, "state");
  for (int j = 0; j < d; ++j)
    emit_num(out, tg.state_name + std::to_string(j + 1), g.phi0[j]);

  out += section_header(prefix, "dynamics");
  for (int j = 0; j < d; ++j)
    emit(out, tg.state_name + std::to_string(j + 1) + "'",
         g.dynamics[static_cast<std::size_t>(j)].print());

  bool nontrivial_binding = g.binding.feedback != binding_mode::none ||
                            g.binding.lambda_feedback != binding_mode::none ||
                            g.binding.evolution.theta || g.binding.evolution.omega ||
                            tg.omega_visible;
  if (nontrivial_binding) {
    out += section_header(prefix, "binding");
    auto mode_text = [](binding_mode m) {
      return m == binding_mode::known ? "known" : m == binding_mode::unknown ? "unknown" : "none";
    };
    if (g.binding.feedback != binding_mode::none)
      emit(out, "feedback", mode_text(g.binding.feedback));
    if (g.binding.lambda_feedback != binding_mode::none)
      emit(out, "lambda", mode_text(g.binding.lambda_feedback));
    if (g.binding.evolution.theta || g.binding.evolution.omega) {
      std::string toks;
      if (g.binding.evolution.theta) toks = "theta";
      if (g.binding.evolution.omega) toks += toks.empty() ? "omega" : " omega";
      emit(out, "evolution", toks);
    }
    if (tg.omega_visible) emit(out, "omega_visible", "true");
  }

  if (!g.lambda_schedule.empty()) {
    out += section_header(prefix, "lambda");
    for (std::size_t l = 0; l < g.lambda_schedule.size(); ++l)
      emit(out, "lambda" + std::to_string(l + 1), g.lambda_schedule[l].print());
  }

  for (int i = 0; i < g.player_count(); ++i) {
    out += section_header(prefix, "player " + std::to_string(i + 1));
    const pure_control_signal& ctl = g.controls[static_cast<std::size_t>(i)];
    const expr* strat = std::get_if<expr>(&ctl.strategy);
    if (!strat)
      throw contract_error("serialize: player " + std::to_string(i + 1) +
                           " has a native strategy, which has no text form");
    emit(out, "strategy", strat->print());
    if (std::isfinite(ctl.lower)) emit_num(out, "lower", ctl.lower);
    if (std::isfinite(ctl.upper)) emit_num(out, "upper", ctl.upper);
    const feedback_law& fb = g.feedbacks[static_cast<std::size_t>(i)];
    emit(out, "coupling", fb.coupling.print());
    if (!player_view)
      for (int j = 0; j < fb.hidden_dim(); ++j)
        emit(out, "hidden" + std::to_string(j + 1),
             fb.hidden[static_cast<std::size_t>(j)].print());
  }

  if (g.coalitions) {
    for (std::size_t ci = 0; ci < g.coalitions->groups.size(); ++ci) {
      out += section_header(prefix, "coalition " + std::to_string(ci + 1));
      const coalition& grp = g.coalitions->groups[ci];
      std::string members;
      for (std::size_t q = 0; q < grp.members.size(); ++q) {
        if (q) members += " ";
        members += std::to_string(grp.members[q] + 1);
      }
      emit(out, "members", members);
      if (!grp.aggregator.empty()) emit(out, "aggregator", grp.aggregator.print());
    }
  }

  switch (tg.schedule.mode) {
    case window_schedule::kind::none:
      break;
    case window_schedule::kind::cells: {
      out += section_header(prefix, "cells");
      if (tg.schedule.hysteresis != 0.0) emit_num(out, "hysteresis", tg.schedule.hysteresis);
      for (const cell_complex::cell& c : tg.schedule.complex->cells)
        emit(out, c.label, c.membership.print());
      break;
    }
    case window_schedule::kind::fixed: {
      out += section_header(prefix, "partition");
      const fixed_partition& p = tg.schedule.partition;
      if (!p.times.empty()) {
        std::string ts;
        for (std::size_t q = 0; q < p.times.size(); ++q) {
          if (q) ts += " ";
          ts += format_double(p.times[q]);
        }
        emit(out, "times", ts);
      } else {
        emit(out, "windows", std::to_string(p.uniform_windows));
      }
      break;
    }
    case window_schedule::kind::sets: {
      out += section_header(prefix, "termination");
      emit(out, "rule", tg.schedule.termination->rule.print());
      if (std::isfinite(tg.schedule.termination->guard))
        emit_num(out, "guard", tg.schedule.termination->guard);
      break;
    }
  }

  const window_functionals& fs = tg.functionals;
  if (fs.omega_dim() + fs.v_dim() + fs.summary_dim() > 0) {
    out += section_header(prefix, "functionals");
    if (fs.source == stream_source::intention) emit(out, "source", "intention");
    for (int i = 0; i < fs.omega_dim(); ++i)
      emit(out, "omega" + std::to_string(i + 1),
           reduction_text(fs.omega[static_cast<std::size_t>(i)]));
    if (fs.omega_init.size() != 0 && fs.omega_init.cwiseAbs().maxCoeff() != 0.0)
      emit(out, "omega_init", list_text(fs.omega_init));
    for (int i = 0; i < fs.v_dim(); ++i)
      emit(out, "v" + std::to_string(i + 1), reduction_text(fs.v[static_cast<std::size_t>(i)]));
    for (int i = 0; i < fs.summary_dim(); ++i)
      emit(out, "s" + std::to_string(i + 1),
           reduction_text(fs.summaries[static_cast<std::size_t>(i)]));
  }

  if (tg.comments) {
    out += section_header(prefix, "comments");
    if (tg.params.size() != 0) emit(out, "params", list_text(tg.params));
    for (int i = 0; i < tg.comments->dim(); ++i) {
      emit(out, "theta" + std::to_string(i + 1),
           tg.comments->update[static_cast<std::size_t>(i)].print());
      if (tg.comments->init[i] != 0.0)
        emit_num(out, "theta" + std::to_string(i + 1) + "_init", tg.comments->init[i]);
    }
  }

  if (!g.invariants.empty()) {
    out += section_header(prefix, "invariants");
    for (const invariant_functional& inv : g.invariants) {
      emit(out, inv.name, inv.value.print());
      if (inv.tolerance != 1e-9) emit_num(out, inv.name + "_tol", inv.tolerance);
    }
  }
}

void emit_extras(std::string& out, const scenario_doc& doc) {
  if (doc.objective) {
    out += "\n[objective]\n";
    if (!doc.objective->integrand.empty())
      emit(out, "integrand", doc.objective->integrand.print());
    if (!doc.objective->terminal.empty()) emit(out, "terminal", doc.objective->terminal.print());
  }
  if (doc.family) {
    out += "\n[family]\n";
    emit(out, "lower", list_text(doc.family->lower));
    emit(out, "upper", list_text(doc.family->upper));
    for (std::size_t i = 0; i < doc.family->rule.update.size(); ++i)
      emit(out, "theta" + std::to_string(i + 1), doc.family->rule.update[i].print());
  }
  if (doc.recurrence) {
    out += "\n[recurrence]\n";
    if (doc.recurrence->affine) {
      emit(out, "affine", "true");
    } else {
      emit(out, "affine", "false");
      std::string terms;
      for (std::size_t b = 0; b < doc.recurrence->basis.size(); ++b) {
        if (b) terms += " | ";
        terms += doc.recurrence->basis[b].print();
      }
      emit(out, "basis", terms);
    }
  }
  if (doc.prediction) {
    out += "\n[prediction]\n";
    emit(out, "assumed", list_text(doc.prediction->assumed));
    emit_num(out, "horizon", doc.prediction->horizon);
  }
  if (!doc.virtual_strategies.empty()) {
    out += "\n[virtual]\n";
    for (std::size_t c = 0; c < doc.virtual_strategies.size(); ++c)
      emit(out, "eps" + std::to_string(c + 1), doc.virtual_strategies[c].print());
  }
  analysis_options defaults;
  const analysis_options& a = doc.analysis;
  bool any = a.quasirandom_threshold != defaults.quasirandom_threshold ||
             a.resonance_threshold != defaults.resonance_threshold ||
             a.variation_threshold != defaults.variation_threshold ||
             a.invariant_depth != defaults.invariant_depth ||
             a.invariant_tol != defaults.invariant_tol;
  if (any) {
    out += "\n[analysis]\n";
    if (a.quasirandom_threshold != defaults.quasirandom_threshold)
      emit_num(out, "quasirandom_threshold", a.quasirandom_threshold);
    if (a.resonance_threshold != defaults.resonance_threshold)
      emit_num(out, "resonance_threshold", a.resonance_threshold);
    if (a.variation_threshold != defaults.variation_threshold)
      emit_num(out, "variation_threshold", a.variation_threshold);
    if (a.invariant_depth != defaults.invariant_depth)
      emit(out, "invariant_depth", std::to_string(a.invariant_depth));
    if (a.invariant_tol != defaults.invariant_tol)
      emit_num(out, "invariant_tol", a.invariant_tol);
  }
}

std::string serialize_impl(const scenario_doc& doc, bool player_view) {
  std::string out = "schema = ";
  out += kScenarioSchema;
  out += "\n";

  if (!doc.is_bundle) {
    emit_system(out, doc.spec, "", true, player_view);
    emit_extras(out, doc);
    return out;
  }

  const game& g0 = doc.systems.systems.at(0).base;
  out += "\n[run]\n";
  if (g0.t0 != 0.0) emit_num(out, "t0", g0.t0);
  emit_num(out, "step", g0.h);
  emit_num(out, "horizon", g0.horizon);
  if (g0.seed != 0 && !player_view) emit(out, "seed", std::to_string(g0.seed));

  out += "\n[schedule]\n";
  const window_schedule& sch = doc.systems.schedule;
  if (sch.mode == window_schedule::kind::fixed) {
    if (!sch.partition.times.empty()) {
      std::string ts;
      for (std::size_t q = 0; q < sch.partition.times.size(); ++q) {
        if (q) ts += " ";
        ts += format_double(sch.partition.times[q]);
      }
      emit(out, "times", ts);
    } else {
      emit(out, "windows", std::to_string(sch.partition.uniform_windows));
    }
  } else if (sch.mode == window_schedule::kind::cells) {
    if (sch.hysteresis != 0.0) emit_num(out, "hysteresis", sch.hysteresis);
    for (const cell_complex::cell& c : sch.complex->cells)
      emit(out, c.label, c.membership.print());
  }

  for (std::size_t j = 0; j < doc.systems.systems.size(); ++j)
    emit_system(out, doc.systems.systems[j], "system " + std::to_string(j + 1) + " ", false,
                player_view);

  for (std::size_t ti = 0; ti < doc.systems.interactions.size(); ++ti) {
    const interaction_term& term = doc.systems.interactions[ti];
    out += "\n[interaction " + std::to_string(ti + 1) + "]\n";
    emit(out, "self", std::to_string(term.self + 1));
    emit(out, "other", std::to_string(term.other + 1));
    for (std::size_t cdx = 0; cdx < term.update.size(); ++cdx)
      emit(out, "theta" + std::to_string(cdx + 1), term.update[cdx].print());
  }

  if (doc.synthesis) {
    for (std::size_t j = 0; j < doc.synthesis->entries.size(); ++j) {
      const synthesis_rule::entry& e = doc.synthesis->entries[j];
      if (e.update.empty() && e.reads.empty()) continue;
      out += "\n[synthesis " + std::to_string(j + 1) + "]\n";
      std::string reads;
      for (std::size_t q = 0; q < e.reads.size(); ++q) {
        if (q) reads += " ";
        reads += std::to_string(e.reads[q] + 1);
      }
      emit(out, "reads", reads);
      for (std::size_t cdx = 0; cdx < e.update.size(); ++cdx)
        emit(out, "theta" + std::to_string(cdx + 1), e.update[cdx].print());
    }
  }

  if (!doc.candidates.empty()) {
    out += "\n[localization]\n";
    for (std::size_t n = 0; n < doc.candidates.size(); ++n) {
      std::string blocks;
      for (std::size_t b = 0; b < doc.candidates[n].blocks.size(); ++b) {
        if (b) blocks += " | ";
        for (std::size_t q = 0; q < doc.candidates[n].blocks[b].size(); ++q) {
          if (q) blocks += " ";
          blocks += std::to_string(doc.candidates[n].blocks[b][q] + 1);
        }
      }
      emit(out, "candidate" + std::to_string(n + 1), blocks);
    }
    if (!doc.probe_seeds.empty()) {
      std::string seeds;
      for (std::size_t q = 0; q < doc.probe_seeds.size(); ++q) {
        if (q) seeds += " ";
        seeds += std::to_string(doc.probe_seeds[q]);
      }
      emit(out, "probe_seeds", seeds);
    }
  }

  emit_extras(out, doc);
  return out;
}

}  // namespace

std::string serialize_scenario(const scenario_doc& doc) { return serialize_impl(doc, false); }

std::string player_view_text(const scenario_doc& doc) { return serialize_impl(doc, true); }

std::uint64_t scenario_hash(const scenario_doc& doc) { return fnv1a64(serialize_scenario(doc)); }

}  // namespace tactica
