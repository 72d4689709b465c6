#pragma once

#include <cctype>
#include <stdexcept>
#include <string>
#include <vector>

#include "invmellin/closedform.hpp"

namespace invmellin {

struct SexprError : std::runtime_error {
    explicit SexprError(const std::string& m) : std::runtime_error("sexpr: " + m) {}
};

namespace detail {

inline std::string poly_sexpr(const Poly& p) {
    std::string s = "(";
    for (int i = 0; i <= std::max(p.degree(), 0); ++i) {
        if (i) s += ' ';
        s += rat_to_string(p.coeff(i));
    }
    return s + ")";
}

inline void expr_sexpr(const ExprPtr& e, std::vector<std::string>& vars, std::string& out) {
    switch (e->kind) {
        case ExprKind::Const: out += rat_to_string(e->value); return;
        case ExprKind::Pi: out += "pi"; return;
        case ExprKind::Log2: out += "log2"; return;
        case ExprKind::Var: out += vars.back(); return;
        case ExprKind::SqrtInt: out += "(sqrtint " + e->intval.get_str() + ")"; return;
        case ExprKind::Add:
        case ExprKind::Mul:
            out += e->kind == ExprKind::Add ? "(+" : "(*";
            for (const auto& k : e->kids) {
                out += ' ';
                expr_sexpr(k, vars, out);
            }
            out += ')';
            return;
        case ExprKind::Pow:
            out += "(pow ";
            expr_sexpr(e->kids[0], vars, out);
            out += ' ' + rat_to_string(e->value) + ')';
            return;
        case ExprKind::Log: out += "(log " + poly_sexpr(e->poly) + ")"; return;
        case ExprKind::ExpIntRat:
            out += "(expint " + poly_sexpr(e->rf.num()) + " " + poly_sexpr(e->rf.den()) + ")";
            return;
        case ExprKind::IntegralFrom:
            if (e->value == 0)
                out += "(int0 " + e->dummy + " ";
            else
                out += "(intfrom " + rat_to_string(e->value) + " " + e->dummy + " ";
            vars.push_back(e->dummy);
            expr_sexpr(e->kids[0], vars, out);
            vars.pop_back();
            out += ')';
            return;
    }
    throw std::logic_error("expr_sexpr: unreachable");
}

struct SexprParser {
    std::vector<std::string> toks;
    std::size_t pos = 0;
    std::vector<std::string> vars;

    explicit SexprParser(const std::string& s, std::string topvar) {
        vars.push_back(std::move(topvar));
        std::string cur;
        for (char c : s) {
            if (c == '(' || c == ')') {
                if (!cur.empty()) toks.push_back(std::exchange(cur, {}));
                toks.push_back(std::string(1, c));
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                if (!cur.empty()) toks.push_back(std::exchange(cur, {}));
            } else {
                cur += c;
            }
        }
        if (!cur.empty()) toks.push_back(cur);
    }

    const std::string& peek() const {
        if (pos >= toks.size()) throw SexprError("unexpected end of input");
        return toks[pos];
    }
    std::string next() {
        if (pos >= toks.size()) throw SexprError("unexpected end of input");
        return toks[pos++];
    }
    void expect(const std::string& t) {
        if (next() != t) throw SexprError("expected '" + t + "'");
    }

    static bool is_rat_token(const std::string& t) {
        return !t.empty() && (std::isdigit(static_cast<unsigned char>(t[0])) ||
                              (t[0] == '-' && t.size() > 1));
    }

    Rat rat() {
        std::string t = next();
        if (!is_rat_token(t)) throw SexprError("expected rational, got '" + t + "'");
        return parse_rat(t);
    }

    Poly poly() {
        expect("(");
        std::vector<Rat> c;
        while (peek() != ")") c.push_back(rat());
        next();
        return Poly(std::move(c));
    }

    ExprPtr expr() {
        std::string t = next();
        if (t != "(") {
            if (t == "pi") return ex_pi();
            if (t == "log2") return ex_log2();
            if (is_rat_token(t)) return ex_const(parse_rat(t));
            if (t == vars.back()) return ex_var();
            for (const auto& v : vars)
                if (t == v) throw SexprError("variable '" + t + "' captured by inner integral");
            throw SexprError("unknown atom '" + t + "'");
        }
        std::string head = next();
        ExprPtr result;
        if (head == "+" || head == "*") {
            std::vector<ExprPtr> kids;
            while (peek() != ")") kids.push_back(expr());
            result = head == "+" ? ex_add(std::move(kids)) : ex_mul(std::move(kids));
        } else if (head == "pow") {
            ExprPtr b = expr();
            Rat p = rat();
            result = ex_pow(std::move(b), p);
        } else if (head == "sqrtint") {
            result = ex_sqrtint(Int(next()));
        } else if (head == "log") {
            result = ex_log(poly());
        } else if (head == "expint") {
            Poly n = poly(), d = poly();
            result = ex_expint(RatFun(std::move(n), std::move(d)));
        } else if (head == "int0" || head == "intfrom") {
            Rat base(0);
            if (head == "intfrom") base = rat();
            std::string dummy = next();
            vars.push_back(dummy);
            ExprPtr g = expr();
            vars.pop_back();
            result = ex_integral(base, dummy, std::move(g));
        } else {
            throw SexprError("unknown form '" + head + "'");
        }
        expect(")");
        return result;
    }
};

}  // namespace detail

inline std::string to_sexpr(const ExprPtr& e, const std::string& var = "x") {
    std::vector<std::string> vars{var};
    std::string out;
    detail::expr_sexpr(e, vars, out);
    return out;
}

inline ExprPtr parse_sexpr(const std::string& s, const std::string& var = "x") {
    detail::SexprParser p(s, var);
    ExprPtr e = p.expr();
    if (p.pos != p.toks.size()) throw SexprError("trailing tokens");
    return e;
}

}  // namespace invmellin
