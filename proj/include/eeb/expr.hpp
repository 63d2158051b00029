#ifndef EEB_EXPR_HPP
#define EEB_EXPR_HPP

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "eeb/errors.hpp"

namespace eeb {

// Arithmetic expression AST for user-supplied field and model definitions.
// Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | power
//   power  := atom ('^' factor)?
//   atom   := number | ident | ident '(' expr ')' | '(' expr ')'
// '^' is right-associative; unary minus applies to the whole power, so
// -x^2 == -(x^2). Whitespace is insignificant. Numbers are decimal with
// optional exponent, no locale handling.
struct ExprNode {
    enum class Kind { Number, Variable, Unary, Binary, Call };
    Kind kind;
    std::size_t offset = 0; // byte offset in the source, for diagnostics

    double number = 0.0;
    std::string name; // variable or function name
    char op = 0;      // '+','-','*','/','^' for Binary, '-' for Unary
    std::unique_ptr<ExprNode> lhs;
    std::unique_ptr<ExprNode> rhs; // Binary only
};

using ExprAst = std::unique_ptr<ExprNode>;

inline const std::set<std::string>& default_variables() {
    static const std::set<std::string> vars = {"Y", "R", "i", "x", "y"};
    return vars;
}

// Recursive-descent parse. Throws ParseError (SyntaxError with byte offset
// and expected-token set, UnknownIdentifier, UnknownFunction).
ExprAst parse_expr(const std::string& src,
                   const std::set<std::string>& variables = default_variables());

// Evaluate with all variables bound. Throws EvalError with the offending
// node's offset for domain violations (ln of non-positive, division by
// zero, fractional power of a negative).
double eval_expr(const ExprNode& ast, const std::map<std::string, double>& bindings);

// Fully parenthesized form; pretty_print(parse(s)) reparses to the same AST.
std::string pretty_print(const ExprNode& ast);

bool ast_equal(const ExprNode& a, const ExprNode& b);

ExprAst clone_expr(const ExprNode& ast);

} // namespace eeb

#endif
