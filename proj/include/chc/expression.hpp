#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "chc/jet.hpp"

namespace chc {

/// Parsed analytic expression over named variables.  The grammar (documented
/// in docs/expressions.md) covers +, -, *, /, ^, parentheses, numeric
/// literals, `pi`, and calls to exp, log, sin, cos, sqrt.
class Expression {
public:
  /// Parses `text` over the given variable names.  Throws
  /// std::invalid_argument with a column number on malformed input.
  static Expression parse(const std::string& text, std::span<const std::string> names);

  /// Default ambient variable names: x, y, z, w, u (first `dim` of them).
  static std::vector<std::string> ambient_names(int dim);
  /// Parameter-domain names for surfaces: u, v, w.
  static std::vector<std::string> parameter_names(int dim);

  /// Exact truncated Taylor expansion about base (jet variables are offsets
  /// from base).  Throws std::domain_error naming the offending subexpression
  /// when evaluation hits a singularity.
  Jet evaluate(std::span<const double> base, int order) const;

  double evaluate_value(std::span<const double> base) const;

  int num_variables() const { return nvars_; }
  const std::string& text() const { return text_; }

  struct Node;

private:
  using NodePtr = std::shared_ptr<const Node>;

  Expression(NodePtr root, int nvars, std::string text)
      : root_(std::move(root)), nvars_(nvars), text_(std::move(text)) {}

  NodePtr root_;
  int nvars_ = 0;
  std::string text_;
};

}  // namespace chc
