#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tactica {

/// Ordered list of variable names an expression may reference. Evaluation
/// receives one double per name, in table order ("slots").
class symbol_table {
public:
  /// Adds a name and returns its slot index. Names must be unique.
  int add(const std::string& name);

  std::optional<int> find(std::string_view name) const;
  const std::vector<std::string>& names() const { return names_; }
  int size() const { return static_cast<int>(names_.size()); }

private:
  std::vector<std::string> names_;
};

/// A compiled arithmetic expression over a fixed symbol table.
///
/// Grammar: real literals; + - * /; unary -; parentheses; the functions
/// sin, cos, exp, abs, min, max, clip(x, lo, hi); declared variables.
/// The grammar is closed: no user-defined functions, no conditionals,
/// no loops. min/max follow (a < b) selection; clip(x, lo, hi) is
/// min(max(x, lo), hi).
///
/// Evaluation is a fixed-order tree walk, so results are bit-stable for
/// identical inputs. Division by zero yields IEEE infinities; non-finite
/// values are the caller's concern (the run loop turns them into numeric
/// failures with context).
class expr {
public:
  expr() = default;

  double eval(std::span<const double> slots) const;

  /// Sorted unique slot indices the expression reads.
  const std::vector<int>& used_slots() const { return used_; }

  /// Canonical text: minimal parentheses, shortest round-trip literals,
  /// single spaces around + and -. Reparsing canonical text yields a
  /// structurally identical expression.
  std::string print() const;

  bool empty() const { return nodes_.empty(); }

private:
  friend class expr_parser;

  enum class op : std::uint8_t {
    num, var, neg, add, sub, mul, div, sin, cos, exp, abs, min, max, clip
  };
  struct node {
    op kind;
    double value = 0.0;  // num
    int slot = -1;       // var
    int a = -1, b = -1, c = -1;
  };

  double eval_node(int i, std::span<const double> slots) const;
  void print_node(int i, int context_prec, std::string& out) const;

  std::vector<node> nodes_;  // root is nodes_.back()
  std::vector<int> used_;
  std::vector<std::string> var_names_;  // slot index -> name, for printing
};

/// Comparison direction of a predicate atom.
enum class rel_op { ge, gt, le, lt };

/// Conjunction of comparisons between arithmetic expressions, written
/// "lhs >= rhs, lhs2 < rhs2, ...". Used for cell membership and set
/// termination rules, where strict/non-strict boundaries matter.
class predicate {
public:
  struct atom {
    expr lhs;
    rel_op op;
    expr rhs;
  };

  bool holds(std::span<const double> slots) const;

  /// Minimum signed slack over the atoms: >= 0 iff the predicate holds,
  /// and its magnitude is the distance-like margin used for hysteresis.
  double margin(std::span<const double> slots) const;

  std::string print() const;
  const std::vector<atom>& atoms() const { return atoms_; }
  bool empty() const { return atoms_.empty(); }

private:
  friend class expr_parser;
  std::vector<atom> atoms_;
};

/// Named constants substituted for identifiers at parse time.
struct constant_table {
  std::vector<std::pair<std::string, double>> values;
  std::optional<double> find(std::string_view name) const;
};

/// Parses an arithmetic expression. Unknown identifiers, syntax errors and
/// malformed literals raise validation_error with line, column and a
/// nearest-name suggestion. `where` names the scenario location in messages.
expr parse_expression(std::string_view text, const symbol_table& symbols,
                      const constant_table& constants = {},
                      std::string_view where = {});

/// Parses a comparison conjunction with the same error conventions.
predicate parse_predicate(std::string_view text, const symbol_table& symbols,
                          const constant_table& constants = {},
                          std::string_view where = {});

/// Closest candidate by edit distance, or empty when nothing is close
/// enough to be a plausible typo. Shared with scenario key validation.
std::string nearest_name(std::string_view name, const std::vector<std::string>& candidates);

/// Shortest round-trip decimal form of a double (parse(format(x)) == x).
std::string format_double(double x);

}  // namespace tactica
