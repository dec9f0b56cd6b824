// Small arithmetic expression grammar over x1, x2 used by the problem
// config JSON. Grammar (see README for the full definition):
//   expr    := or
//   or      := and ('|' and)*
//   and     := cmp ('&' cmp)*
//   cmp     := sum (('<'|'<='|'>'|'>='|'=='|'!=') sum)?
//   sum     := term (('+'|'-') term)*
//   term    := unary (('*'|'/') unary)*
//   unary   := ('-'|'+') unary | power
//   power   := atom ('^' unary)?
//   atom    := number | 'x1' | 'x2' | 'pi' | func '(' expr ')' | '(' expr ')'
//   func    := 'sin' | 'cos' | 'exp' | 'abs' | 'sqrt'
// Comparisons and boolean operators evaluate to 1 or 0.

#ifndef VEMOCP_EXPR_HPP
#define VEMOCP_EXPR_HPP

#include <functional>
#include <string>

#include <Eigen/Dense>

namespace vemocp {

using Expr = std::function<double(const Eigen::Vector2d&)>;

/// Parses the expression grammar; throws std::runtime_error with the
/// position of the offending token on malformed input.
Expr parse_expr(const std::string& text);

} // namespace vemocp

#endif
