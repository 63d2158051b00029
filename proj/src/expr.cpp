#include "eeb/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace eeb {

namespace {

const std::set<std::string>& known_functions() {
    static const std::set<std::string> fns = {"exp", "ln", "tanh", "sin", "cos", "sqrt", "abs"};
    return fns;
}

struct Parser {
    const std::string& src;
    const std::set<std::string>& vars;
    size_t pos = 0;

    void skip_ws() {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
    }

    [[noreturn]] void fail(const std::string& expected, size_t at) {
        throw ParseError(ErrorCode::SyntaxError,
                         "syntax error at offset " + std::to_string(at) + ": expected " + expected,
                         at, expected);
    }

    bool peek(char c) {
        skip_ws();
        return pos < src.size() && src[pos] == c;
    }

    bool accept(char c) {
        if (peek(c)) {
            ++pos;
            return true;
        }
        return false;
    }

    ExprAst parse() {
        ExprAst e = parse_expr();
        skip_ws();
        if (pos != src.size()) fail("end of input or operator", pos);
        return e;
    }

    ExprAst parse_expr() {
        ExprAst lhs = parse_term();
        for (;;) {
            skip_ws();
            if (pos < src.size() && (src[pos] == '+' || src[pos] == '-')) {
                char op = src[pos];
                size_t at = pos;
                ++pos;
                ExprAst rhs = parse_term();
                auto node = std::make_unique<ExprNode>();
                node->kind = ExprNode::Kind::Binary;
                node->op = op;
                node->offset = at;
                node->lhs = std::move(lhs);
                node->rhs = std::move(rhs);
                lhs = std::move(node);
            } else {
                return lhs;
            }
        }
    }

    ExprAst parse_term() {
        ExprAst lhs = parse_factor();
        for (;;) {
            skip_ws();
            if (pos < src.size() && (src[pos] == '*' || src[pos] == '/')) {
                char op = src[pos];
                size_t at = pos;
                ++pos;
                ExprAst rhs = parse_factor();
                auto node = std::make_unique<ExprNode>();
                node->kind = ExprNode::Kind::Binary;
                node->op = op;
                node->offset = at;
                node->lhs = std::move(lhs);
                node->rhs = std::move(rhs);
                lhs = std::move(node);
            } else {
                return lhs;
            }
        }
    }

    // Unary minus applies to the whole power: -x^2 == -(x^2).
    ExprAst parse_factor() {
        skip_ws();
        if (pos < src.size() && src[pos] == '-') {
            size_t at = pos;
            ++pos;
            ExprAst inner = parse_factor();
            auto node = std::make_unique<ExprNode>();
            node->kind = ExprNode::Kind::Unary;
            node->op = '-';
            node->offset = at;
            node->lhs = std::move(inner);
            return node;
        }
        return parse_power();
    }

    ExprAst parse_power() {
        ExprAst base = parse_atom();
        skip_ws();
        if (pos < src.size() && src[pos] == '^') {
            size_t at = pos;
            ++pos;
            ExprAst exponent = parse_factor(); // right-associative
            auto node = std::make_unique<ExprNode>();
            node->kind = ExprNode::Kind::Binary;
            node->op = '^';
            node->offset = at;
            node->lhs = std::move(base);
            node->rhs = std::move(exponent);
            return node;
        }
        return base;
    }

    ExprAst parse_atom() {
        skip_ws();
        if (pos >= src.size()) fail("number, identifier, or '('", pos);
        char c = src[pos];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
        if (c == '(') {
            ++pos;
            ExprAst e = parse_expr();
            if (!accept(')')) fail("')'", pos);
            return e;
        }
        fail("number, identifier, or '('", pos);
    }

    ExprAst parse_number() {
        size_t start = pos;
        bool digits = false;
        while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) {
            ++pos;
            digits = true;
        }
        if (pos < src.size() && src[pos] == '.') {
            ++pos;
            while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) {
                ++pos;
                digits = true;
            }
        }
        if (!digits) fail("digit", start);
        if (pos < src.size() && (src[pos] == 'e' || src[pos] == 'E')) {
            size_t mark = pos;
            ++pos;
            if (pos < src.size() && (src[pos] == '+' || src[pos] == '-')) ++pos;
            if (pos >= src.size() || !std::isdigit(static_cast<unsigned char>(src[pos]))) {
                pos = mark; // 'e' belongs to something else; not an exponent
            } else {
                while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
            }
        }
        auto node = std::make_unique<ExprNode>();
        node->kind = ExprNode::Kind::Number;
        node->offset = start;
        node->number = std::strtod(src.substr(start, pos - start).c_str(), nullptr);
        return node;
    }

    ExprAst parse_ident() {
        size_t start = pos;
        while (pos < src.size() &&
               (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
            ++pos;
        std::string name = src.substr(start, pos - start);
        skip_ws();
        if (pos < src.size() && src[pos] == '(') {
            if (!known_functions().count(name))
                throw ParseError(ErrorCode::UnknownFunction, "unknown function '" + name + "'",
                                 start, "one of exp, ln, tanh, sin, cos, sqrt, abs");
            ++pos;
            ExprAst arg = parse_expr();
            if (!accept(')')) fail("')'", pos);
            auto node = std::make_unique<ExprNode>();
            node->kind = ExprNode::Kind::Call;
            node->name = name;
            node->offset = start;
            node->lhs = std::move(arg);
            return node;
        }
        if (!vars.count(name))
            throw ParseError(ErrorCode::UnknownIdentifier, "unknown identifier '" + name + "'",
                             start, "a declared variable");
        auto node = std::make_unique<ExprNode>();
        node->kind = ExprNode::Kind::Variable;
        node->name = name;
        node->offset = start;
        return node;
    }
};

} // namespace

ExprAst parse_expr(const std::string& src, const std::set<std::string>& variables) {
    Parser p{src, variables};
    return p.parse();
}

double eval_expr(const ExprNode& ast, const std::map<std::string, double>& bindings) {
    switch (ast.kind) {
        case ExprNode::Kind::Number: return ast.number;
        case ExprNode::Kind::Variable: {
            auto it = bindings.find(ast.name);
            if (it == bindings.end())
                throw EvalError("unbound variable '" + ast.name + "'", ast.offset);
            return it->second;
        }
        case ExprNode::Kind::Unary: return -eval_expr(*ast.lhs, bindings);
        case ExprNode::Kind::Binary: {
            double a = eval_expr(*ast.lhs, bindings);
            double b = eval_expr(*ast.rhs, bindings);
            switch (ast.op) {
                case '+': return a + b;
                case '-': return a - b;
                case '*': return a * b;
                case '/':
                    if (b == 0.0) throw EvalError("division by zero", ast.offset);
                    return a / b;
                case '^': {
                    if (a < 0.0 && b != std::floor(b))
                        throw EvalError("fractional power of a negative base", ast.offset);
                    if (a == 0.0 && b < 0.0) throw EvalError("zero to a negative power", ast.offset);
                    double r = std::pow(a, b);
                    if (!std::isfinite(r)) throw EvalError("non-finite power", ast.offset);
                    return r;
                }
            }
            throw EvalError("bad operator", ast.offset);
        }
        case ExprNode::Kind::Call: {
            double a = eval_expr(*ast.lhs, bindings);
            if (ast.name == "exp") return std::exp(a);
            if (ast.name == "ln") {
                if (a <= 0.0) throw EvalError("ln of non-positive value", ast.offset);
                return std::log(a);
            }
            if (ast.name == "tanh") return std::tanh(a);
            if (ast.name == "sin") return std::sin(a);
            if (ast.name == "cos") return std::cos(a);
            if (ast.name == "sqrt") {
                if (a < 0.0) throw EvalError("sqrt of negative value", ast.offset);
                return std::sqrt(a);
            }
            if (ast.name == "abs") return std::fabs(a);
            throw EvalError("bad function", ast.offset);
        }
    }
    throw EvalError("bad node", ast.offset);
}

std::string pretty_print(const ExprNode& ast) {
    char buf[64];
    switch (ast.kind) {
        case ExprNode::Kind::Number:
            std::snprintf(buf, sizeof(buf), "%.17g", ast.number);
            return buf;
        case ExprNode::Kind::Variable: return ast.name;
        case ExprNode::Kind::Unary: return "(-" + pretty_print(*ast.lhs) + ")";
        case ExprNode::Kind::Binary:
            return "(" + pretty_print(*ast.lhs) + " " + ast.op + " " + pretty_print(*ast.rhs) + ")";
        case ExprNode::Kind::Call: return ast.name + "(" + pretty_print(*ast.lhs) + ")";
    }
    return "?";
}

bool ast_equal(const ExprNode& a, const ExprNode& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case ExprNode::Kind::Number: return a.number == b.number;
        case ExprNode::Kind::Variable: return a.name == b.name;
        case ExprNode::Kind::Unary: return ast_equal(*a.lhs, *b.lhs);
        case ExprNode::Kind::Binary:
            return a.op == b.op && ast_equal(*a.lhs, *b.lhs) && ast_equal(*a.rhs, *b.rhs);
        case ExprNode::Kind::Call: return a.name == b.name && ast_equal(*a.lhs, *b.lhs);
    }
    return false;
}

ExprAst clone_expr(const ExprNode& ast) {
    auto node = std::make_unique<ExprNode>();
    node->kind = ast.kind;
    node->offset = ast.offset;
    node->number = ast.number;
    node->name = ast.name;
    node->op = ast.op;
    if (ast.lhs) node->lhs = clone_expr(*ast.lhs);
    if (ast.rhs) node->rhs = clone_expr(*ast.rhs);
    return node;
}

} // namespace eeb
