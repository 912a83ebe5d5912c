#include "tactica/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

#include "tactica/errors.hpp"

namespace tactica {

int symbol_table::add(const std::string& name) {
  if (find(name)) throw contract_error("symbol_table: duplicate name '" + name + "'");
  names_.push_back(name);
  return static_cast<int>(names_.size()) - 1;
}

std::optional<int> symbol_table::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return static_cast<int>(i);
  return std::nullopt;
}

std::optional<double> constant_table::find(std::string_view name) const {
  for (const auto& [k, v] : values)
    if (k == name) return v;
  return std::nullopt;
}

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, end);
}

namespace {

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t prev = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t cur = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, prev + (a[i - 1] == b[j - 1] ? 0 : 1)});
      prev = cur;
    }
  }
  return row[b.size()];
}

}  // namespace

std::string nearest_name(std::string_view name, const std::vector<std::string>& candidates) {
  std::string best;
  std::size_t best_d = name.size() / 2 + 2;  // farther than this is not a typo
  for (const auto& c : candidates) {
    std::size_t d = edit_distance(name, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

double expr::eval_node(int i, std::span<const double> slots) const {
  const node& n = nodes_[static_cast<std::size_t>(i)];
  switch (n.kind) {
    case op::num: return n.value;
    case op::var: return slots[static_cast<std::size_t>(n.slot)];
    case op::neg: return -eval_node(n.a, slots);
    case op::add: return eval_node(n.a, slots) + eval_node(n.b, slots);
    case op::sub: return eval_node(n.a, slots) - eval_node(n.b, slots);
    case op::mul: return eval_node(n.a, slots) * eval_node(n.b, slots);
    case op::div: return eval_node(n.a, slots) / eval_node(n.b, slots);
    case op::sin: return std::sin(eval_node(n.a, slots));
    case op::cos: return std::cos(eval_node(n.a, slots));
    case op::exp: return std::exp(eval_node(n.a, slots));
    case op::abs: return std::fabs(eval_node(n.a, slots));
    case op::min: {
      double a = eval_node(n.a, slots), b = eval_node(n.b, slots);
      return b < a ? b : a;
    }
    case op::max: {
      double a = eval_node(n.a, slots), b = eval_node(n.b, slots);
      return a < b ? b : a;
    }
    case op::clip: {
      double x = eval_node(n.a, slots), lo = eval_node(n.b, slots), hi = eval_node(n.c, slots);
      double y = x < lo ? lo : x;
      return hi < y ? hi : y;
    }
  }
  return 0.0;  // unreachable
}

double expr::eval(std::span<const double> slots) const {
  if (nodes_.empty()) throw contract_error("expr: eval on empty expression");
  if (!used_.empty() && used_.back() >= static_cast<int>(slots.size()))
    throw contract_error("expr: evaluation context smaller than the symbol table it was parsed against");
  return eval_node(static_cast<int>(nodes_.size()) - 1, slots);
}

// Precedence for canonical printing: additive 1, multiplicative 2, unary 3,
// primary 4. Left operands print at the operator's level, right operands one
// higher, so the printed text reparses to the identical tree.
void expr::print_node(int i, int context_prec, std::string& out) const {
  const node& n = nodes_[static_cast<std::size_t>(i)];
  int prec;
  switch (n.kind) {
    case op::add: case op::sub: prec = 1; break;
    case op::mul: case op::div: prec = 2; break;
    case op::neg: prec = 3; break;
    default: prec = 4; break;
  }
  bool parens = prec < context_prec;
  if (parens) out += '(';
  switch (n.kind) {
    case op::num:
      if (std::signbit(n.value)) {
        out += '-';
        out += format_double(-n.value);
      } else {
        out += format_double(n.value);
      }
      break;
    case op::var:
      out += var_names_[static_cast<std::size_t>(n.slot)];
      break;
    case op::neg:
      out += '-';
      print_node(n.a, 3, out);
      break;
    case op::add:
      print_node(n.a, 1, out);
      out += " + ";
      print_node(n.b, 2, out);
      break;
    case op::sub:
      print_node(n.a, 1, out);
      out += " - ";
      print_node(n.b, 2, out);
      break;
    case op::mul:
      print_node(n.a, 2, out);
      out += '*';
      print_node(n.b, 3, out);
      break;
    case op::div:
      print_node(n.a, 2, out);
      out += '/';
      print_node(n.b, 3, out);
      break;
    case op::sin: out += "sin("; print_node(n.a, 0, out); out += ')'; break;
    case op::cos: out += "cos("; print_node(n.a, 0, out); out += ')'; break;
    case op::exp: out += "exp("; print_node(n.a, 0, out); out += ')'; break;
    case op::abs: out += "abs("; print_node(n.a, 0, out); out += ')'; break;
    case op::min:
      out += "min(";
      print_node(n.a, 0, out);
      out += ", ";
      print_node(n.b, 0, out);
      out += ')';
      break;
    case op::max:
      out += "max(";
      print_node(n.a, 0, out);
      out += ", ";
      print_node(n.b, 0, out);
      out += ')';
      break;
    case op::clip:
      out += "clip(";
      print_node(n.a, 0, out);
      out += ", ";
      print_node(n.b, 0, out);
      out += ", ";
      print_node(n.c, 0, out);
      out += ')';
      break;
  }
  if (parens) out += ')';
}

std::string expr::print() const {
  if (nodes_.empty()) return {};
  std::string out;
  print_node(static_cast<int>(nodes_.size()) - 1, 0, out);
  return out;
}

bool predicate::holds(std::span<const double> slots) const { return margin(slots) >= 0.0; }

double predicate::margin(std::span<const double> slots) const {
  if (atoms_.empty()) throw contract_error("predicate: empty");
  double m = std::numeric_limits<double>::infinity();
  for (const auto& a : atoms_) {
    double l = a.lhs.eval(slots), r = a.rhs.eval(slots);
    double slack;
    switch (a.op) {
      case rel_op::ge: slack = l - r; break;
      case rel_op::le: slack = r - l; break;
      // Strict atoms fail at equality: report an infinitesimally negative
      // slack there so holds() (slack >= 0) excludes the boundary.
      case rel_op::gt:
        slack = (l == r) ? -std::numeric_limits<double>::denorm_min() : l - r;
        break;
      case rel_op::lt:
        slack = (l == r) ? -std::numeric_limits<double>::denorm_min() : r - l;
        break;
      default: slack = 0.0; break;
    }
    m = slack < m ? slack : m;
  }
  return m;
}

std::string predicate::print() const {
  std::string out;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (i) out += ", ";
    out += atoms_[i].lhs.print();
    switch (atoms_[i].op) {
      case rel_op::ge: out += " >= "; break;
      case rel_op::gt: out += " > "; break;
      case rel_op::le: out += " <= "; break;
      case rel_op::lt: out += " < "; break;
    }
    out += atoms_[i].rhs.print();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

enum class tok_kind { number, ident, punct, end };

struct token {
  tok_kind kind;
  std::string_view text;
  int line, col;
  double value = 0.0;
};

const char* const kFunctionNames[] = {"sin", "cos", "exp", "abs", "min", "max", "clip"};

struct lexer {
  std::string_view src;
  std::size_t pos = 0;
  int line = 1, col = 1;
  std::string_view where;

  [[noreturn]] void fail(int l, int c, const std::string& msg) const {
    std::ostringstream os;
    os << "expression error";
    if (!where.empty()) os << " in " << where;
    os << " at line " << l << ", column " << c << ": " << msg;
    throw validation_error(os.str());
  }

  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      if (src[pos + i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    pos += n;
  }

  token next() {
    while (pos < src.size() &&
           (src[pos] == ' ' || src[pos] == '\t' || src[pos] == '\n' || src[pos] == '\r'))
      advance(1);
    if (pos >= src.size()) return {tok_kind::end, {}, line, col, 0.0};
    int l = line, c = col;
    char ch = src[pos];
    if ((ch >= '0' && ch <= '9') ||
        (ch == '.' && pos + 1 < src.size() && src[pos + 1] >= '0' && src[pos + 1] <= '9')) {
      std::size_t end = pos;
      while (end < src.size() && ((src[end] >= '0' && src[end] <= '9') || src[end] == '.')) ++end;
      if (end < src.size() && (src[end] == 'e' || src[end] == 'E')) {
        std::size_t e = end + 1;
        if (e < src.size() && (src[e] == '+' || src[e] == '-')) ++e;
        if (e < src.size() && src[e] >= '0' && src[e] <= '9') {
          while (e < src.size() && src[e] >= '0' && src[e] <= '9') ++e;
          end = e;
        }
      }
      std::string_view text = src.substr(pos, end - pos);
      double v = 0.0;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || p != text.data() + text.size())
        fail(l, c, "malformed number '" + std::string(text) + "'");
      advance(end - pos);
      return {tok_kind::number, text, l, c, v};
    }
    if ((ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || ch == '_') {
      std::size_t end = pos;
      while (end < src.size() &&
             ((src[end] >= 'a' && src[end] <= 'z') || (src[end] >= 'A' && src[end] <= 'Z') ||
              (src[end] >= '0' && src[end] <= '9') || src[end] == '_'))
        ++end;
      std::string_view text = src.substr(pos, end - pos);
      advance(end - pos);
      return {tok_kind::ident, text, l, c, 0.0};
    }
    if (ch == '>' || ch == '<') {
      std::size_t n = (pos + 1 < src.size() && src[pos + 1] == '=') ? 2u : 1u;
      std::string_view text = src.substr(pos, n);
      advance(n);
      return {tok_kind::punct, text, l, c, 0.0};
    }
    if (ch == '+' || ch == '-' || ch == '*' || ch == '/' || ch == '(' || ch == ')' || ch == ',') {
      std::string_view text = src.substr(pos, 1);
      advance(1);
      return {tok_kind::punct, text, l, c, 0.0};
    }
    fail(l, c, std::string("unexpected character '") + ch + "'");
  }
};

}  // namespace

// Recursive descent over: expression := term (('+'|'-') term)*
//                         term       := factor (('*'|'/') factor)*
//                         factor     := '-' factor | primary
//                         primary    := number | ident | ident '(' args ')' | '(' expression ')'
class expr_parser {
public:
  expr_parser(std::string_view text, const symbol_table& symbols, const constant_table& constants,
              std::string_view where)
      : lex_{text, 0, 1, 1, where}, symbols_(symbols), constants_(constants) {
    cur_ = lex_.next();
  }

  expr parse_full_expression() {
    expr e;
    attach_names(e);
    parse_expression(e);
    expect_end();
    collect_used(e);
    return e;
  }

  predicate parse_full_predicate() {
    predicate p;
    for (;;) {
      predicate::atom a;
      parse_comparison(a);
      p.atoms_.push_back(std::move(a));
      if (cur_.kind == tok_kind::punct && cur_.text == ",") {
        consume();
        continue;
      }
      break;
    }
    expect_end();
    return p;
  }

private:
  lexer lex_;
  token cur_;
  const symbol_table& symbols_;
  const constant_table& constants_;

  void consume() { cur_ = lex_.next(); }

  [[noreturn]] void fail(const std::string& msg) { lex_.fail(cur_.line, cur_.col, msg); }

  void expect_end() {
    if (cur_.kind != tok_kind::end)
      fail("unexpected trailing input '" + std::string(cur_.text) + "'");
  }

  void attach_names(expr& e) { e.var_names_ = symbols_.names(); }

  void collect_used(expr& e) {
    std::vector<int> used;
    for (const auto& n : e.nodes_)
      if (n.kind == expr::op::var) used.push_back(n.slot);
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    e.used_ = std::move(used);
  }

  int push(expr& e, expr::node n) {
    e.nodes_.push_back(n);
    return static_cast<int>(e.nodes_.size()) - 1;
  }

  void parse_comparison(predicate::atom& out) {
    expr lhs;
    attach_names(lhs);
    parse_expression(lhs);
    collect_used(lhs);
    if (cur_.kind != tok_kind::punct ||
        (cur_.text != ">=" && cur_.text != ">" && cur_.text != "<=" && cur_.text != "<"))
      fail("expected a comparison operator (>=, >, <=, <)");
    rel_op op = cur_.text == ">=" ? rel_op::ge
              : cur_.text == ">"  ? rel_op::gt
              : cur_.text == "<=" ? rel_op::le
                                  : rel_op::lt;
    consume();
    expr rhs;
    attach_names(rhs);
    parse_expression(rhs);
    collect_used(rhs);
    out.lhs = std::move(lhs);
    out.op = op;
    out.rhs = std::move(rhs);
  }

  int parse_expression(expr& e) {
    int a = parse_term(e);
    while (cur_.kind == tok_kind::punct && (cur_.text == "+" || cur_.text == "-")) {
      bool add = cur_.text == "+";
      consume();
      int b = parse_term(e);
      a = push(e, {add ? expr::op::add : expr::op::sub, 0.0, -1, a, b, -1});
    }
    return a;
  }

  int parse_term(expr& e) {
    int a = parse_factor(e);
    while (cur_.kind == tok_kind::punct && (cur_.text == "*" || cur_.text == "/")) {
      bool mul = cur_.text == "*";
      consume();
      int b = parse_factor(e);
      a = push(e, {mul ? expr::op::mul : expr::op::div, 0.0, -1, a, b, -1});
    }
    return a;
  }

  int parse_factor(expr& e) {
    if (cur_.kind == tok_kind::punct && cur_.text == "-") {
      consume();
      int a = parse_factor(e);
      return push(e, {expr::op::neg, 0.0, -1, a, -1, -1});
    }
    return parse_primary(e);
  }

  int parse_primary(expr& e) {
    if (cur_.kind == tok_kind::number) {
      double v = cur_.value;
      consume();
      return push(e, {expr::op::num, v, -1, -1, -1, -1});
    }
    if (cur_.kind == tok_kind::punct && cur_.text == "(") {
      consume();
      int a = parse_expression(e);
      if (cur_.kind != tok_kind::punct || cur_.text != ")") fail("expected ')'");
      consume();
      return a;
    }
    if (cur_.kind == tok_kind::ident) {
      std::string name(cur_.text);
      int line = cur_.line, col = cur_.col;
      consume();
      if (cur_.kind == tok_kind::punct && cur_.text == "(") return parse_call(e, name, line, col);
      if (auto slot = symbols_.find(name))
        return push(e, {expr::op::var, 0.0, *slot, -1, -1, -1});
      if (auto c = constants_.find(name))
        return push(e, {expr::op::num, *c, -1, -1, -1, -1});
      std::vector<std::string> candidates = symbols_.names();
      for (const auto& [k, v] : constants_.values) candidates.push_back(k);
      for (const char* f : kFunctionNames) candidates.push_back(f);
      std::string hint = nearest_name(name, candidates);
      std::string msg = "unknown variable '" + name + "'";
      if (!hint.empty()) msg += "; did you mean '" + hint + "'?";
      lex_.fail(line, col, msg);
    }
    fail("expected a number, variable, or '('");
  }

  int parse_call(expr& e, const std::string& name, int line, int col) {
    struct fn {
      const char* name;
      expr::op kind;
      int arity;
    };
    static const fn kFns[] = {
        {"sin", expr::op::sin, 1}, {"cos", expr::op::cos, 1}, {"exp", expr::op::exp, 1},
        {"abs", expr::op::abs, 1}, {"min", expr::op::min, 2}, {"max", expr::op::max, 2},
        {"clip", expr::op::clip, 3},
    };
    const fn* f = nullptr;
    for (const auto& k : kFns)
      if (name == k.name) f = &k;
    if (!f) {
      std::vector<std::string> candidates;
      for (const char* n : kFunctionNames) candidates.emplace_back(n);
      std::string hint = nearest_name(name, candidates);
      std::string msg = "unknown function '" + name + "'";
      if (!hint.empty()) msg += "; did you mean '" + hint + "'?";
      lex_.fail(line, col, msg);
    }
    consume();  // '('
    int args[3] = {-1, -1, -1};
    for (int i = 0; i < f->arity; ++i) {
      if (i > 0) {
        if (cur_.kind != tok_kind::punct || cur_.text != ",") fail("expected ','");
        consume();
      }
      args[i] = parse_expression(e);
    }
    if (cur_.kind != tok_kind::punct || cur_.text != ")")
      fail("expected ')' after arguments of " + name);
    consume();
    return push(e, {f->kind, 0.0, -1, args[0], args[1], args[2]});
  }
};

expr parse_expression(std::string_view text, const symbol_table& symbols,
                      const constant_table& constants, std::string_view where) {
  expr_parser p(text, symbols, constants, where);
  return p.parse_full_expression();
}

predicate parse_predicate(std::string_view text, const symbol_table& symbols,
                          const constant_table& constants, std::string_view where) {
  expr_parser p(text, symbols, constants, where);
  return p.parse_full_predicate();
}

}  // namespace tactica
