#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "invmellin/diffop.hpp"
#include "invmellin/kovacic.hpp"
#include "invmellin/sexpr.hpp"

namespace invmellin {

struct UnsupportedSingularity : std::runtime_error {
    explicit UnsupportedSingularity(const std::string& what) : std::runtime_error(what) {}
};

/// Hyperexponential function constant * prod q_i^{e_i} * exp(int exppart),
/// with rational logarithmic derivative (the certificate).
struct HyperexpTerm {
    Rat constant{1};
    std::vector<std::pair<Poly, Rat>> factors;  // monic poly, nonzero exponent
    RatFun exppart{0};

    RatFun certificate() const {
        RatFun u = exppart;
        for (const auto& [q, e] : factors) u += RatFun(e) * RatFun(q.derivative(), q);
        return u;
    }

    ExprPtr expr() const {
        std::vector<ExprPtr> fs;
        if (constant != 1) fs.push_back(ex_const(constant));
        for (const auto& [q, e] : factors) fs.push_back(ex_pow(poly_to_expr(q), e));
        if (!exppart.is_zero()) fs.push_back(ex_expint(exppart));
        if (fs.empty()) return ex_const(1);
        return normalize(ex_mul(std::move(fs)));
    }

    /// Sum of |numerator| + denominator over all exponents; the chain
    /// tie-break key.
    Int height() const {
        Int h(0);
        for (const auto& [q, e] : factors) h += abs(numer(e)) + denom(e);
        return h;
    }
};

namespace detail {

/// L applied through the substitution y = w P, where w' / w = v: returns
/// the operator M with L(w P) = w M(P).
inline RatOp conjugate_by_gauge(const DiffOp& L, const RatFun& v) {
    RatOp dv({v, RatFun(1)});
    RatOp m = RatOp::zero();
    RatOp power = RatOp::identity();
    for (int j = 0; j <= L.order(); ++j) {
        if (j > 0) power = dv * power;
        m = m + RatOp({RatFun(L.coeff(j))}) * power;
    }
    return m;
}

/// Exact certificate check: with R_0 = 1, R_{j+1} = R_j' + u R_j, a
/// hyperexponential solution with logarithmic derivative u satisfies
/// sum_j p_j R_j = 0.
inline bool certificate_holds(const DiffOp& L, const RatFun& u) {
    RatFun r(1), total(0);
    for (int j = 0; j <= L.order(); ++j) {
        if (j > 0) r = r.derivative() + u * r;
        total += RatFun(L.coeff(j)) * r;
    }
    return total.is_zero();
}

inline void merge_factor(std::vector<std::pair<Poly, Rat>>& factors, const Poly& q, const Rat& e) {
    if (e == 0) return;
    for (auto& [p, pe] : factors) {
        if (p == q) {
            pe += e;
            return;
        }
    }
    factors.emplace_back(q, e);
}

}  // namespace detail

/// All solutions of L y = 0 with rational logarithmic derivative, for
/// operators whose finite singular points are rational and regular.
/// Exponent candidates come from indicial polynomials, the polynomial
/// cofactor degree from the exponent balance at infinity, the cofactor
/// itself from exact linear algebra; every candidate is verified exactly
/// through the certificate before being returned.
inline std::vector<HyperexpTerm> hyperexp_solutions(const DiffOp& L) {
    if (L.is_zero() || L.order() < 1)
        throw std::domain_error("hyperexp_solutions: operator order must be >= 1");

    Poly lead_sf = squarefree_part(L.leading());
    auto [roots, residual] = split_rational_roots(lead_sf);
    if (residual.degree() > 0)
        throw UnsupportedSingularity("irrational singular point in the leading coefficient");
    std::vector<Rat> points;
    for (const auto& [c, m] : roots) points.push_back(c);
    std::sort(points.begin(), points.end());

    auto rational_exponents = [](const Poly& ind) {
        std::vector<Rat> es;
        for (const auto& [r, m] : rational_roots(ind)) es.push_back(r);
        std::sort(es.begin(), es.end());
        return es;
    };

    std::vector<std::vector<Rat>> exps;
    std::vector<Rat> inf_exps;
    try {
        for (const Rat& c : points) exps.push_back(rational_exponents(indicial_polynomial(L, c)));
        inf_exps = rational_exponents(indicial_polynomial_at_infinity(L));
    } catch (const IrregularSingularPoint& err) {
        throw UnsupportedSingularity(err.what());
    }

    std::vector<HyperexpTerm> out;
    std::vector<RatFun> seen;
    // a singular point with no rational local exponent blocks every candidate
    for (const auto& e : exps)
        if (e.empty()) return out;

    std::vector<std::size_t> idx(points.size(), 0);
    while (true) {
        Rat esum(0);
        RatFun v(0);
        for (std::size_t i = 0; i < points.size(); ++i) {
            const Rat& e = exps[i][idx[i]];
            esum += e;
            v += RatFun(e) * detail::pole_term(points[i], 1);
        }
        for (const Rat& lam : inf_exps) {
            Rat md = lam - esum;
            if (!is_integer(md) || md < 0) continue;
            long m = to_long(md);
            RatOp M = detail::conjugate_by_gauge(L, v);
            std::vector<RatFun> E;
            RatFun xj(1);
            for (long j = 0; j <= m; ++j) {
                if (j > 0) xj = xj * RatFun::variable();
                E.push_back(M.apply(xj));
            }
            auto P = detail::solve_monic_poly(E);
            if (!P) continue;
            RatFun u = v;
            if (P->degree() > 0) u += RatFun(P->derivative(), *P);
            if (!detail::certificate_holds(L, u)) continue;
            if (std::find(seen.begin(), seen.end(), u) != seen.end()) continue;
            seen.push_back(u);
            HyperexpTerm term;
            for (std::size_t i = 0; i < points.size(); ++i)
                detail::merge_factor(term.factors,
                                     Poly(std::vector<Rat>{-points[i], Rat(1)}), exps[i][idx[i]]);
            if (P->degree() > 0) {
                Poly mon = *P / P->leading();
                auto [proots, prest] = split_rational_roots(mon);
                for (const auto& [r, mult] : proots)
                    detail::merge_factor(term.factors, Poly(std::vector<Rat>{-r, Rat(1)}),
                                         Rat(mult));
                if (prest.degree() > 0) detail::merge_factor(term.factors, prest, Rat(1));
            }
            std::erase_if(term.factors, [](const auto& f) { return f.second == 0; });
            std::sort(term.factors.begin(), term.factors.end(),
                      [](const auto& a, const auto& b) {
                          if (a.first.degree() != b.first.degree())
                              return a.first.degree() < b.first.degree();
                          return poly_to_string(a.first) < poly_to_string(b.first);
                      });
            out.push_back(std::move(term));
        }
        // odometer over finite-point exponent choices
        std::size_t i = 0;
        for (; i < idx.size(); ++i) {
            if (++idx[i] < exps[i].size()) break;
            idx[i] = 0;
        }
        if (i == idx.size()) break;
    }
    std::sort(out.begin(), out.end(), [](const HyperexpTerm& a, const HyperexpTerm& b) {
        if (a.height() != b.height()) return a.height() < b.height();
        return to_sexpr(a.expr()) < to_sexpr(b.expr());
    });
    return out;
}

}  // namespace invmellin
