#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "invmellin/closedform.hpp"
#include "invmellin/ratint.hpp"

namespace invmellin {

struct RadicandTooComplex : std::runtime_error {
    explicit RadicandTooComplex(const std::string& what) : std::runtime_error(what) {}
};

/// Composition f(g(x)) of rational functions.
inline RatFun ratfun_compose(const RatFun& f, const RatFun& g) {
    auto comp = [&](const Poly& p) {
        RatFun r(0);
        for (int i = p.degree(); i >= 0; --i) r = r * g + RatFun(p.coeff(i));
        return r;
    };
    RatFun dn = comp(f.den());
    if (dn.is_zero()) throw std::domain_error("ratfun_compose: denominator vanishes");
    return comp(f.num()) / dn;
}

namespace detail {

/// Polynomial negative at sample points across (0,1) is negated; closed
/// forms here are only defined up to a constant factor, so this just keeps
/// fractional powers real-valued on the interval.
inline Poly flip_if_negative_on_unit(Poly v) {
    int neg = 0, pos = 0;
    for (int k = 1; k <= 3; ++k) {
        Rat val = v.eval_rat(make_rat(2 * k - 1, 6));
        if (val < 0) ++neg;
        if (val > 0) ++pos;
    }
    if (neg > 0 && pos == 0) return -v;
    return v;
}

}  // namespace detail

/// e^{int mu} as a closed form: Hermite/Rothstein-Trager integration turns
/// the log part into rational powers of primitive polynomials and the
/// rational part stays as an ExpIntRat certificate. Falls back to the bare
/// ExpIntRat when residues are not rational. Result is defined up to a
/// nonzero constant factor.
inline ExprPtr exp_integral_expr(const RatFun& mu) {
    if (mu.is_zero()) return ex_const(1);
    RationalIntegral anti;
    try {
        anti = integrate_rational(mu);
    } catch (const NonRationalResidues&) {
        return ex_expint(mu);
    }
    std::vector<ExprPtr> factors;
    if (!anti.rational_part.is_zero())
        factors.push_back(ex_expint(anti.rational_part.derivative()));
    for (const auto& [c, v] : anti.log_terms)
        factors.push_back(ex_pow(poly_to_expr(detail::flip_if_negative_on_unit(v)), c));
    if (factors.empty()) return ex_const(1);
    return normalize(ex_mul(std::move(factors)));
}

namespace detail {

/// Euler substitution data for u = sqrt(rad): x and sqrt(rad) as rational
/// functions of u.
struct SqrtSubstitution {
    RatFun x_of_u;
    RatFun sqrt_of_u;
};

inline SqrtSubstitution euler_substitution(const Poly& rad) {
    RatFun u = RatFun::variable();
    if (rad.degree() == 1) {
        // x = (u^2 - r0)/r1
        Rat r0 = rad.coeff(0), r1 = rad.coeff(1);
        RatFun x = (u * u - RatFun(r0)) / RatFun(r1);
        return {x, u};
    }
    if (rad.degree() == 2) {
        Rat r0 = rad.coeff(0), r1 = rad.coeff(1), r2 = rad.coeff(2);
        if (auto s = rat_sqrt(r2)) {
            // sqrt(rad) = u + s x  =>  x = (u^2 - r0)/(r1 - 2 s u)
            RatFun x = RatFun(Poly(std::vector<Rat>{-r0, Rat(0), Rat(1)}),
                              Poly(std::vector<Rat>{r1, -2 * *s}));
            return {x, u + RatFun(*s) * x};
        }
        if (auto s = rat_sqrt(r0)) {
            // sqrt(rad) = u x + s  =>  x = (2 s u - r1)/(r2 - u^2)
            RatFun x = RatFun(Poly(std::vector<Rat>{-r1, 2 * *s}),
                              Poly(std::vector<Rat>{r2, Rat(0), Rat(-1)}));
            return {x, u * x + RatFun(*s)};
        }
        throw RadicandTooComplex("no rational Euler substitution for the radicand");
    }
    throw RadicandTooComplex("radicand degree exceeds 2");
}

/// Polynomial in u mapped back through u = sqrt(rad): even powers collapse
/// into rad, odd powers carry one sqrt factor.
inline ExprPtr u_poly_to_expr(const Poly& q, const Poly& rad) {
    Poly even, odd;
    Poly radpow(Rat(1));
    for (int j = 0; j <= q.degree(); ++j) {
        if (j > 0 && j % 2 == 0) radpow *= rad;
        if (q.coeff(j) == 0) continue;
        if (j % 2 == 0)
            even += q.coeff(j) * radpow;
        else
            odd += q.coeff(j) * radpow;
    }
    ExprPtr e = poly_to_expr(even);
    if (odd.is_zero()) return normalize(e);
    ExprPtr sq = ex_pow(poly_to_expr(rad), make_rat(1, 2));
    return normalize(ex_add({e, ex_mul({poly_to_expr(odd), sq})}));
}

inline ExprPtr u_ratfun_to_expr(const RatFun& f, const Poly& rad) {
    ExprPtr n = u_poly_to_expr(f.num(), rad);
    if (f.is_poly()) return n;
    return normalize(ex_mul({n, ex_pow(u_poly_to_expr(f.den(), rad), Rat(-1))}));
}

/// Splits Delta = rad * g^2 with deg rad <= 2 (rational-coefficient radicand
/// absorbing the squarefree constant content) and g rational.
inline std::pair<Poly, RatFun> split_square_part(const RatFun& delta) {
    Poly prod = delta.num() * delta.den();
    Rat lc = prod.leading();
    auto sf = squarefree_decomposition(prod);
    Poly rad(lc);
    Poly g(Rat(1));
    for (const auto& [q, m] : sf) {
        if (m % 2) rad *= q;
        for (int i = 0; i < m / 2; ++i) g *= q;
    }
    return {rad, RatFun(g, delta.den())};
}

}  // namespace detail

/// int g * sqrt(rad) dx as a closed form, via the Euler substitution
/// u = sqrt(rad) and exact rational integration in u. deg rad in {1, 2}.
inline ExprPtr integrate_sqrt_rational(const RatFun& g, const Poly& rad) {
    if (rad.degree() < 1 || rad.degree() > 2)
        throw RadicandTooComplex("radicand degree outside {1,2}");
    auto sub = detail::euler_substitution(rad);
    RatFun integrand = ratfun_compose(g, sub.x_of_u) * sub.sqrt_of_u * sub.x_of_u.derivative();
    RationalIntegral anti;
    try {
        anti = integrate_rational(integrand);
    } catch (const NonRationalResidues&) {
        throw RadicandTooComplex("non-rational residues after substitution");
    }
    std::vector<ExprPtr> terms;
    if (!anti.rational_part.is_zero())
        terms.push_back(detail::u_ratfun_to_expr(anti.rational_part, rad));
    for (const auto& [c, v] : anti.log_terms) {
        ExprPtr arg = detail::u_poly_to_expr(v, rad);
        // constant arguments only shift the integration constant
        if (arg->kind == ExprKind::Const) continue;
        // Log nodes hold polynomials in x; algebraic arguments stay outside
        // the supported closed-form class
        throw RadicandTooComplex("logarithmic part does not rationalize");
    }
    if (terms.empty()) return ex_const(0);
    return normalize(ex_add(std::move(terms)));
}

/// exp(coeff * int sqrt(Delta) dx) as a product of rational powers of
/// polynomials in sqrt(rad), where Delta = rad * g^2, deg rad <= 2.
/// Result is defined up to a nonzero constant factor.
inline ExprPtr rationalize_quadratic_radical(const RatFun& delta, const Rat& coeff) {
    if (delta.is_zero()) return ex_const(1);
    auto [rad, g] = detail::split_square_part(delta);
    if (rad.degree() == 0) {
        auto s = rat_sqrt(rad.coeff(0));
        if (!s) throw RadicandTooComplex("constant radicand is not a rational square");
        return exp_integral_expr(RatFun(coeff * *s) * g);
    }
    if (rad.degree() > 2) throw RadicandTooComplex("radicand degree exceeds 2");
    auto sub = detail::euler_substitution(rad);
    RatFun integrand = ratfun_compose(g, sub.x_of_u) * sub.sqrt_of_u * sub.x_of_u.derivative();
    RationalIntegral anti;
    try {
        anti = integrate_rational(integrand);
    } catch (const NonRationalResidues&) {
        throw RadicandTooComplex("non-rational residues after substitution");
    }
    if (!(anti.rational_part.num().degree() <= 0 && anti.rational_part.is_poly()))
        throw RadicandTooComplex("non-logarithmic part survives the substitution");
    std::vector<ExprPtr> factors;
    for (const auto& [c, v] : anti.log_terms) {
        // keep radicands positive on (0,1): a log argument negative across
        // the interval is flipped, which only changes the constant factor
        Poly vv = v;
        int neg = 0, pos = 0;
        for (int k = 1; k <= 3; ++k) {
            Rat x = make_rat(2 * k - 1, 6);
            Rat rv = rad.eval_rat(x);
            if (rv < 0) continue;
            double u = std::sqrt(rat_cast<double>(rv));
            double val = 0;
            for (int j = v.degree(); j >= 0; --j) val = val * u + rat_cast<double>(v.coeff(j));
            (val < 0 ? neg : pos) += 1;
        }
        if (neg > 0 && pos == 0) vv = -vv;
        ExprPtr base = detail::u_poly_to_expr(vv, rad);
        factors.push_back(ex_pow(base, coeff * c));
    }
    if (factors.empty()) return ex_const(1);
    return normalize(ex_mul(std::move(factors)));
}

}  // namespace invmellin
