#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "invmellin/ratfun.hpp"

namespace invmellin {

struct NonRationalResidues : std::runtime_error {
    NonRationalResidues() : std::runtime_error("integrand has non-rational residues") {}
};

/// Extended Euclid: returns (g, s, t) with s*a + t*b = g, g monic gcd.
inline std::tuple<Poly, Poly, Poly> poly_ext_gcd(const Poly& a, const Poly& b) {
    Poly r0 = a, r1 = b;
    Poly s0(Rat(1)), s1, t0, t1(Rat(1));
    while (!r1.is_zero()) {
        auto [q, r] = divmod(r0, r1);
        r0 = std::move(r1);
        r1 = std::move(r);
        Poly s2 = s0 - q * s1, t2 = t0 - q * t1;
        s0 = std::move(s1);
        s1 = std::move(s2);
        t0 = std::move(t1);
        t1 = std::move(t2);
    }
    if (r0.is_zero()) return {r0, s0, t0};
    Rat lc = r0.leading();
    return {r0 / lc, s0 / lc, t0 / lc};
}

/// Resultant of two nonzero polynomials over Q.
inline Rat poly_resultant(Poly a, Poly b) {
    if (a.is_zero() || b.is_zero()) throw std::domain_error("resultant of zero polynomial");
    Rat sign(1), scale(1);
    while (b.degree() > 0) {
        Poly r = a % b;
        if (r.is_zero()) return Rat(0);
        // Res(a,b) = (-1)^(da db) lc(b)^(da - dr) Res(b, r)
        if ((a.degree() % 2) && (b.degree() % 2)) sign = -sign;
        scale *= pow_rat(b.leading(), a.degree() - r.degree());
        a = std::move(b);
        b = std::move(r);
    }
    // deg b == 0: Res(a, b) = lc(b)^deg(a)
    return sign * scale * pow_rat(b.coeff(0), a.degree());
}

/// Antiderivative of a rational function: a rational part plus a sum of
/// c_i * log(V_i) with rational c_i and primitive integer polynomials V_i.
struct RationalIntegral {
    RatFun rational_part;
    std::vector<std::pair<Rat, Poly>> log_terms;

    RatFun derivative() const {
        RatFun d = rational_part.derivative();
        for (const auto& [c, v] : log_terms) d += RatFun(c * v.derivative(), v);
        return d;
    }
};

namespace detail {

/// Partial fractions of a proper fraction num/(prod dens[i]) over pairwise
/// coprime dens; returns numerators per denominator.
inline std::vector<Poly> partial_fractions(const Poly& num, const std::vector<Poly>& dens) {
    std::vector<Poly> out(dens.size());
    Poly rem = num;
    Poly tail(Rat(1));
    for (const auto& d : dens) tail *= d;
    for (std::size_t i = 0; i < dens.size(); ++i) {
        tail = tail / dens[i];
        if (i + 1 == dens.size()) {
            out[i] = rem;
            break;
        }
        // rem/(dens[i]*tail) = a/dens[i] + b/tail, via s*dens[i] + t*tail = 1
        auto [g, s, t] = poly_ext_gcd(dens[i], tail);
        if (g.degree() != 0) throw std::logic_error("partial_fractions: denominators not coprime");
        out[i] = (rem * t) % dens[i];
        rem = (rem - out[i] * tail) / dens[i];
    }
    return out;
}

}  // namespace detail

/// Hermite reduction plus Rothstein-Trager logarithmic part.
/// Throws NonRationalResidues when a residue lies outside Q.
inline RationalIntegral integrate_rational(const RatFun& f) {
    RationalIntegral out;
    // polynomial part
    auto [polypart, rem] = divmod(f.num(), f.den());
    std::vector<Rat> ip(polypart.degree() + 2, Rat(0));
    for (int i = 0; i <= polypart.degree(); ++i) ip[i + 1] = polypart.coeff(i) / Rat(i + 1);
    out.rational_part = RatFun(Poly(std::move(ip)));
    if (rem.is_zero()) return out;

    // proper part: split over the squarefree decomposition den = prod q_i^i
    auto sf = squarefree_decomposition(f.den());
    std::vector<Poly> dens;
    for (const auto& [q, m] : sf) dens.push_back(pow_ratfun(RatFun(q), m).num());
    Rat lc = f.den().leading();
    std::vector<Poly> nums = detail::partial_fractions(rem / lc, dens);

    Poly logs_num;     // accumulated residual with squarefree denominator
    Poly logs_den(Rat(1));
    for (std::size_t i = 0; i < sf.size(); ++i) {
        const Poly& q = sf[i].first;
        int m = sf[i].second;
        Poly a = nums[i];
        // reduce a/q^m to residual/q by integration by parts
        while (m > 1) {
            // a = s*q + t*q' (gcd(q, q') = 1)
            auto [g, s, t] = poly_ext_gcd(q, q.derivative());
            if (g.degree() != 0) throw std::logic_error("integrate_rational: not squarefree");
            Poly tt = (a * t) % q;
            Poly ss = (a - tt * q.derivative()) / q;
            // a/q^m = ss/q^(m-1) + tt*q'/q^m;
            // int tt*q'/q^m = -tt/((m-1) q^(m-1)) + int tt'/((m-1) q^(m-1))
            Rat k = make_rat(1, m - 1);
            out.rational_part -= RatFun(k * tt, pow_ratfun(RatFun(q), m - 1).num());
            a = ss + k * tt.derivative();
            --m;
        }
        if (!a.is_zero()) {
            logs_num = logs_num * q + a * logs_den;
            logs_den = logs_den * q;
        } else {
            // nothing to add for this factor
        }
    }
    if (logs_num.is_zero()) return out;

    // Rothstein-Trager on logs_num/logs_den (squarefree denominator):
    // residues are the roots of R(t) = Res_x(den, num - t*den').
    Poly b = logs_den.monic();
    Poly a2 = logs_num / logs_den.leading();
    Poly bp = b.derivative();
    int dt = b.degree();
    // interpolate R(t) from dt+1 sample points where the x-degree of
    // num - t*den' does not drop
    std::vector<Rat> ts, rs;
    int xdeg = std::max(a2.degree(), bp.degree());
    for (long j = 0; static_cast<int>(ts.size()) <= dt; ++j) {
        Rat t(j);
        Poly c = a2 - t * bp;
        if (c.is_zero() || c.degree() < xdeg) continue;
        ts.push_back(t);
        rs.push_back(poly_resultant(b, c));
    }
    // Lagrange interpolation of R
    Poly R;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        Poly li(rs[i]);
        for (std::size_t j = 0; j < ts.size(); ++j) {
            if (j == i) continue;
            li = li * Poly(std::vector<Rat>{-ts[j], Rat(1)}) / (ts[i] - ts[j]);
        }
        R += li;
    }
    if (R.is_zero()) throw std::logic_error("integrate_rational: zero resultant");
    Poly Rsf = squarefree_part(R);
    auto roots = rational_roots(Rsf);
    if (static_cast<int>(roots.size()) != Rsf.degree()) throw NonRationalResidues();
    for (const auto& [t, mult] : roots) {
        if (t == 0) continue;
        Poly v = poly_gcd(b, a2 - t * bp);
        if (v.degree() == 0) continue;
        // integer-primitive argument
        Int den(1);
        for (const auto& c : v.coeffs()) den = int_lcm(den, denom(c));
        out.log_terms.emplace_back(t, (Rat(den) * v).primitive());
    }
    return out;
}

}  // namespace invmellin
