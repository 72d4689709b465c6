#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "invmellin/ratfun.hpp"

namespace invmellin {

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class ExprKind {
    Const,         // rational constant
    Pi,            // the circle constant
    Log2,          // log 2
    SqrtInt,       // sqrt of a squarefree integer > 1
    Var,           // the current variable (innermost integration dummy)
    Add,           // n-ary sum
    Mul,           // n-ary product
    Pow,           // base ^ rational exponent
    Log,           // log of a polynomial in the current variable
    ExpIntRat,     // exp(integral of a rational function), up to a constant
    IntegralFrom,  // integral from a rational base point to the current
                   // variable; integrand uses Var for the dummy
};

/// Immutable closed-form expression tree. Values live on (0,1); radicands
/// are kept positive there by convention (principal real roots).
class Expr {
  public:
    ExprKind kind;
    Rat value;                  // Const value; Pow exponent; IntegralFrom base
    Int intval;                 // SqrtInt radicand
    Poly poly;                  // Log argument
    RatFun rf;                  // ExpIntRat integrand
    std::string dummy;          // IntegralFrom dummy-variable label
    std::vector<ExprPtr> kids;  // Add/Mul terms; Pow base; IntegralFrom integrand

    explicit Expr(ExprKind k) : kind(k) {}
};

inline ExprPtr ex_const(const Rat& v) {
    auto e = std::make_shared<Expr>(ExprKind::Const);
    e->value = v;
    return e;
}
inline ExprPtr ex_const(long v) { return ex_const(Rat(v)); }
inline ExprPtr ex_pi() { return std::make_shared<Expr>(ExprKind::Pi); }
inline ExprPtr ex_log2() { return std::make_shared<Expr>(ExprKind::Log2); }
inline ExprPtr ex_sqrtint(const Int& k) {
    if (k <= 0) throw std::domain_error("ex_sqrtint: need positive radicand");
    auto e = std::make_shared<Expr>(ExprKind::SqrtInt);
    e->intval = k;
    return e;
}
inline ExprPtr ex_var() { return std::make_shared<Expr>(ExprKind::Var); }
inline ExprPtr ex_add(std::vector<ExprPtr> kids) {
    auto e = std::make_shared<Expr>(ExprKind::Add);
    e->kids = std::move(kids);
    return e;
}
inline ExprPtr ex_mul(std::vector<ExprPtr> kids) {
    auto e = std::make_shared<Expr>(ExprKind::Mul);
    e->kids = std::move(kids);
    return e;
}
inline ExprPtr ex_pow(ExprPtr base, const Rat& exponent) {
    auto e = std::make_shared<Expr>(ExprKind::Pow);
    e->kids.push_back(std::move(base));
    e->value = exponent;
    return e;
}
inline ExprPtr ex_log(Poly p) {
    if (p.is_zero()) throw std::domain_error("ex_log: zero argument");
    auto e = std::make_shared<Expr>(ExprKind::Log);
    e->poly = std::move(p);
    return e;
}
inline ExprPtr ex_expint(RatFun f) {
    auto e = std::make_shared<Expr>(ExprKind::ExpIntRat);
    e->rf = std::move(f);
    return e;
}
inline ExprPtr ex_integral(const Rat& base, std::string dummy, ExprPtr integrand) {
    auto e = std::make_shared<Expr>(ExprKind::IntegralFrom);
    e->value = base;
    e->dummy = std::move(dummy);
    e->kids.push_back(std::move(integrand));
    return e;
}

inline int rat_cmp(const Rat& a, const Rat& b) { return a < b ? -1 : (b < a ? 1 : 0); }

inline int poly_cmp(const Poly& a, const Poly& b) {
    if (a.degree() != b.degree()) return a.degree() < b.degree() ? -1 : 1;
    for (int i = a.degree(); i >= 0; --i)
        if (int c = rat_cmp(a.coeff(i), b.coeff(i))) return c;
    return 0;
}

/// Total order on expression trees, used for canonical sorting.
inline int expr_cmp(const ExprPtr& a, const ExprPtr& b) {
    if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
    switch (a->kind) {
        case ExprKind::Const: return rat_cmp(a->value, b->value);
        case ExprKind::Pi:
        case ExprKind::Log2:
        case ExprKind::Var: return 0;
        case ExprKind::SqrtInt: return a->intval < b->intval ? -1 : (b->intval < a->intval ? 1 : 0);
        case ExprKind::Pow:
            if (int c = expr_cmp(a->kids[0], b->kids[0])) return c;
            return rat_cmp(a->value, b->value);
        case ExprKind::Log: return poly_cmp(a->poly, b->poly);
        case ExprKind::ExpIntRat:
            if (int c = poly_cmp(a->rf.num(), b->rf.num())) return c;
            return poly_cmp(a->rf.den(), b->rf.den());
        case ExprKind::IntegralFrom:
            if (int c = rat_cmp(a->value, b->value)) return c;
            if (a->dummy != b->dummy) return a->dummy < b->dummy ? -1 : 1;
            return expr_cmp(a->kids[0], b->kids[0]);
        case ExprKind::Add:
        case ExprKind::Mul:
            if (a->kids.size() != b->kids.size()) return a->kids.size() < b->kids.size() ? -1 : 1;
            for (std::size_t i = 0; i < a->kids.size(); ++i)
                if (int c = expr_cmp(a->kids[i], b->kids[i])) return c;
            return 0;
    }
    return 0;
}

inline bool expr_eq(const ExprPtr& a, const ExprPtr& b) { return expr_cmp(a, b) == 0; }

inline bool is_const(const ExprPtr& e, const Rat& v) {
    return e->kind == ExprKind::Const && e->value == v;
}

/// Exact rational power when it exists (integer exponent, or perfect root).
inline std::optional<Rat> pow_rat_exact(const Rat& base, const Rat& e) {
    if (is_integer(e)) return pow_rat(base, to_long(e));
    if (base == 0) return e > 0 ? std::optional<Rat>(Rat(0)) : std::nullopt;
    if (base < 0) return std::nullopt;
    long q = to_long(Rat(denom(e)));
    Int rn, rd;
    int en = mpz_root(rn.get_mpz_t(), numer(base).get_mpz_t(), static_cast<unsigned long>(q));
    int ed = mpz_root(rd.get_mpz_t(), denom(base).get_mpz_t(), static_cast<unsigned long>(q));
    if (!en || !ed) return std::nullopt;
    return pow_rat(make_rat(rn, rd), to_long(Rat(numer(e))));
}

ExprPtr normalize(const ExprPtr& e);

namespace detail {

/// sqrt of a positive rational as (rational factor, squarefree radicand):
/// sqrt(a/b) = (m / b) * sqrt(s) with a*b = s*m^2.
inline std::pair<Rat, Int> sqrt_decompose(const Rat& v) {
    auto [s, m] = squarefree_decompose_int(numer(v) * denom(v));
    return {make_rat(m, denom(v)), s};
}

/// Builds a canonical factor for base^exp (exp != 0), folding constants into
/// cfac; pushes at most one factor per call.
inline void push_factor(std::vector<ExprPtr>& factors, Rat& cfac, const ExprPtr& base,
                        const Rat& exp) {
    if (base->kind == ExprKind::Const) {
        if (base->value == 0) {
            cfac = 0;
            return;
        }
        if (auto v = pow_rat_exact(base->value, exp)) {
            cfac *= *v;
            return;
        }
        if (base->value > 0 && denom(exp) == 2) {
            // c^(p/2) = c^((p-1)/2) * sqrt(c), p odd
            long p = to_long(Rat(numer(exp)));
            long half = (p - (p % 2 != 0 ? (p > 0 ? 1 : -1) : 0)) / 2;
            Rat rest = exp - Rat(2 * half) / 2;  // +-1/2
            cfac *= pow_rat(base->value, half);
            auto [f, s] = sqrt_decompose(base->value);
            if (rest > 0) {
                cfac *= f;
                if (s > 1) factors.push_back(ex_sqrtint(s));
            } else {
                cfac /= f * Rat(s);
                if (s > 1) factors.push_back(ex_sqrtint(s));  // 1/sqrt(s) = sqrt(s)/s
            }
            return;
        }
        factors.push_back(ex_pow(base, exp));
        return;
    }
    if (base->kind == ExprKind::SqrtInt) {
        push_factor(factors, cfac, ex_const(Rat(base->intval)), exp / 2);
        return;
    }
    if (exp == 1) {
        factors.push_back(base);
        return;
    }
    factors.push_back(ex_pow(base, exp));
}

}  // namespace detail

/// Canonical form: flattened and sorted sums/products, merged powers,
/// exact-constant folding. Idempotent.
inline ExprPtr normalize(const ExprPtr& e) {
    switch (e->kind) {
        case ExprKind::Const:
        case ExprKind::Pi:
        case ExprKind::Log2:
        case ExprKind::Var:
            return e;
        case ExprKind::SqrtInt: {
            auto [s, m] = squarefree_decompose_int(e->intval);
            if (s == 1) return ex_const(Rat(m));
            if (m == 1) return e;
            return normalize(ex_mul({ex_const(Rat(m)), ex_sqrtint(s)}));
        }
        case ExprKind::Log: {
            if (e->poly.degree() == 0) {
                if (e->poly.coeff(0) == 1) return ex_const(0);
                if (e->poly.coeff(0) == 2) return ex_log2();
            }
            return e;
        }
        case ExprKind::ExpIntRat:
            if (e->rf.is_zero()) return ex_const(1);
            return e;
        case ExprKind::IntegralFrom: {
            ExprPtr g = normalize(e->kids[0]);
            if (is_const(g, Rat(0))) return ex_const(0);
            return ex_integral(e->value, e->dummy, g);
        }
        case ExprKind::Pow: {
            ExprPtr b = normalize(e->kids[0]);
            Rat p = e->value;
            if (p == 0) return ex_const(1);
            if (b->kind == ExprKind::Pow) return normalize(ex_pow(b->kids[0], p * b->value));
            if (b->kind == ExprKind::Mul) {
                // all factors positive on (0,1) by convention
                std::vector<ExprPtr> ks;
                for (const auto& k : b->kids) ks.push_back(ex_pow(k, p));
                return normalize(ex_mul(std::move(ks)));
            }
            if (b->kind == ExprKind::Const || b->kind == ExprKind::SqrtInt || p != 1) {
                std::vector<ExprPtr> factors;
                Rat cfac(1);
                detail::push_factor(factors, cfac, b, p);
                if (factors.empty()) return ex_const(cfac);
                if (cfac == 1 && factors.size() == 1) return factors[0];
                std::vector<ExprPtr> ks;
                if (cfac != 1) ks.push_back(ex_const(cfac));
                for (auto& f : factors) ks.push_back(std::move(f));
                if (ks.size() == 1) return ks[0];
                std::sort(ks.begin(), ks.end(),
                          [](const ExprPtr& x, const ExprPtr& y) { return expr_cmp(x, y) < 0; });
                return ex_mul(std::move(ks));
            }
            return b;
        }
        case ExprKind::Mul: {
            // flatten, split every factor into (base, exponent), merge bases
            std::vector<std::pair<ExprPtr, Rat>> bes;
            Rat cfac(1);
            std::vector<ExprPtr> stack(e->kids.rbegin(), e->kids.rend());
            while (!stack.empty()) {
                ExprPtr k = normalize(stack.back());
                stack.pop_back();
                if (k->kind == ExprKind::Mul) {
                    for (auto it = k->kids.rbegin(); it != k->kids.rend(); ++it)
                        stack.push_back(*it);
                } else if (k->kind == ExprKind::Const) {
                    cfac *= k->value;
                } else if (k->kind == ExprKind::Pow) {
                    bes.emplace_back(k->kids[0], k->value);
                } else {
                    bes.emplace_back(k, Rat(1));
                }
            }
            if (cfac == 0) return ex_const(0);
            // merge equal bases
            std::sort(bes.begin(), bes.end(),
                      [](const auto& x, const auto& y) { return expr_cmp(x.first, y.first) < 0; });
            std::vector<ExprPtr> factors;
            for (std::size_t i = 0; i < bes.size();) {
                Rat exp(0);
                std::size_t j = i;
                while (j < bes.size() && expr_eq(bes[j].first, bes[i].first)) exp += bes[j++].second;
                if (exp != 0) detail::push_factor(factors, cfac, bes[i].first, exp);
                i = j;
            }
            if (cfac == 0) return ex_const(0);
            std::sort(factors.begin(), factors.end(),
                      [](const ExprPtr& x, const ExprPtr& y) { return expr_cmp(x, y) < 0; });
            std::vector<ExprPtr> ks;
            if (cfac != 1 || factors.empty()) ks.push_back(ex_const(cfac));
            for (auto& f : factors) ks.push_back(std::move(f));
            if (ks.size() == 1) return ks[0];
            return ex_mul(std::move(ks));
        }
        case ExprKind::Add: {
            // flatten, split terms into (rational coefficient, core), combine
            std::vector<std::pair<Rat, ExprPtr>> terms;
            Rat ctot(0);
            std::vector<ExprPtr> stack(e->kids.rbegin(), e->kids.rend());
            while (!stack.empty()) {
                ExprPtr k = normalize(stack.back());
                stack.pop_back();
                if (k->kind == ExprKind::Add) {
                    for (auto it = k->kids.rbegin(); it != k->kids.rend(); ++it)
                        stack.push_back(*it);
                } else if (k->kind == ExprKind::Const) {
                    ctot += k->value;
                } else if (k->kind == ExprKind::Mul && k->kids[0]->kind == ExprKind::Const) {
                    Rat c = k->kids[0]->value;
                    std::vector<ExprPtr> rest(k->kids.begin() + 1, k->kids.end());
                    terms.emplace_back(c, rest.size() == 1 ? rest[0] : ex_mul(std::move(rest)));
                } else {
                    terms.emplace_back(Rat(1), k);
                }
            }
            std::sort(terms.begin(), terms.end(),
                      [](const auto& x, const auto& y) { return expr_cmp(x.second, y.second) < 0; });
            std::vector<ExprPtr> out;
            for (std::size_t i = 0; i < terms.size();) {
                Rat c(0);
                std::size_t j = i;
                while (j < terms.size() && expr_eq(terms[j].second, terms[i].second))
                    c += terms[j++].first;
                if (c == 1)
                    out.push_back(terms[i].second);
                else if (c != 0)
                    out.push_back(normalize(ex_mul({ex_const(c), terms[i].second})));
                i = j;
            }
            if (ctot != 0 || out.empty()) out.insert(out.begin(), ex_const(ctot));
            if (out.size() == 1) return out[0];
            return ex_add(std::move(out));
        }
    }
    return e;
}

/// Polynomial as an expression in the current variable.
inline ExprPtr poly_to_expr(const Poly& p) {
    if (p.is_zero()) return ex_const(0);
    std::vector<ExprPtr> terms;
    for (int i = 0; i <= p.degree(); ++i) {
        if (p.coeff(i) == 0) continue;
        if (i == 0)
            terms.push_back(ex_const(p.coeff(i)));
        else
            terms.push_back(ex_mul({ex_const(p.coeff(i)), ex_pow(ex_var(), Rat(i))}));
    }
    return normalize(ex_add(std::move(terms)));
}

inline ExprPtr ratfun_to_expr(const RatFun& f) {
    if (f.is_poly()) return poly_to_expr(f.num());
    return normalize(ex_mul({poly_to_expr(f.num()), ex_pow(poly_to_expr(f.den()), Rat(-1))}));
}

/// Exact derivative with respect to the current variable; IntegralFrom
/// differentiates to its integrand (which reads Var as the outer variable).
inline ExprPtr differentiate(const ExprPtr& e) {
    switch (e->kind) {
        case ExprKind::Const:
        case ExprKind::Pi:
        case ExprKind::Log2:
        case ExprKind::SqrtInt:
            return ex_const(0);
        case ExprKind::Var:
            return ex_const(1);
        case ExprKind::Add: {
            std::vector<ExprPtr> ks;
            for (const auto& k : e->kids) ks.push_back(differentiate(k));
            return normalize(ex_add(std::move(ks)));
        }
        case ExprKind::Mul: {
            std::vector<ExprPtr> terms;
            for (std::size_t i = 0; i < e->kids.size(); ++i) {
                std::vector<ExprPtr> fs;
                for (std::size_t j = 0; j < e->kids.size(); ++j)
                    fs.push_back(i == j ? differentiate(e->kids[j]) : e->kids[j]);
                terms.push_back(ex_mul(std::move(fs)));
            }
            return normalize(ex_add(std::move(terms)));
        }
        case ExprKind::Pow:
            return normalize(ex_mul({ex_const(e->value), ex_pow(e->kids[0], e->value - 1),
                                     differentiate(e->kids[0])}));
        case ExprKind::Log:
            return ratfun_to_expr(RatFun(e->poly.derivative(), e->poly));
        case ExprKind::ExpIntRat:
            return normalize(ex_mul({ratfun_to_expr(e->rf), e}));
        case ExprKind::IntegralFrom:
            return e->kids[0];
    }
    throw std::logic_error("differentiate: unreachable");
}

/// Generic evaluator; IntegralFrom nodes are delegated to `quad`, called as
/// quad(base: Rat, integrand: ExprPtr, upper: T) -> T, ExpIntRat nodes to
/// expint(integrand: RatFun, x: T) -> T. Numeric type T needs
/// pow/log/sqrt/atan and conversion from Rat via rat_cast<T>.
template <class T, class Quad, class ExpInt>
T eval_expr_with(const ExprPtr& e, const T& x, Quad&& quad, ExpInt&& expint) {
    using std::atan;
    using std::exp;
    using std::log;
    using std::pow;
    using std::sqrt;
    switch (e->kind) {
        case ExprKind::Const: return rat_cast<T>(e->value);
        case ExprKind::Pi: return 4 * atan(T(1));
        case ExprKind::Log2: return log(T(2));
        case ExprKind::SqrtInt: return sqrt(rat_cast<T>(Rat(e->intval)));
        case ExprKind::Var: return x;
        case ExprKind::Add: {
            T s(0);
            for (const auto& k : e->kids) s += eval_expr_with(k, x, quad, expint);
            return s;
        }
        case ExprKind::Mul: {
            T s(1);
            for (const auto& k : e->kids) s *= eval_expr_with(k, x, quad, expint);
            return s;
        }
        case ExprKind::Pow: {
            T b = eval_expr_with(e->kids[0], x, quad, expint);
            if (is_integer(e->value)) {
                // exact integer power, valid for negative bases too
                long n = to_long(e->value);
                T r(1), base = b;
                unsigned long m = n < 0 ? static_cast<unsigned long>(-n)
                                        : static_cast<unsigned long>(n);
                while (m) {
                    if (m & 1) r *= base;
                    base *= base;
                    m >>= 1;
                }
                return n < 0 ? T(1) / r : r;
            }
            return pow(b, rat_cast<T>(e->value));
        }
        case ExprKind::Log: return log(e->poly.eval<T>(x));
        case ExprKind::ExpIntRat: return expint(e->rf, x);
        case ExprKind::IntegralFrom: return quad(e->value, e->kids[0], x);
    }
    throw std::logic_error("eval_expr_with: unreachable");
}

template <class T, class Quad>
T eval_expr_with(const ExprPtr& e, const T& x, Quad&& quad) {
    return eval_expr_with(e, x, quad, [](const RatFun&, const T&) -> T {
        throw std::domain_error("eval_expr_with: unevaluated ExpIntRat");
    });
}

/// Evaluator for integral-free expressions.
template <class T>
T eval_expr_plain(const ExprPtr& e, const T& x) {
    return eval_expr_with(e, x, [](const Rat&, const ExprPtr&, const T&) -> T {
        throw std::domain_error("eval_expr_plain: IntegralFrom needs quadrature");
    });
}

}  // namespace invmellin
