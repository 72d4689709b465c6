#pragma once

#include <stdexcept>
#include <vector>

#include "invmellin/diffop.hpp"
#include "invmellin/recop.hpp"

namespace invmellin {

/// Differential equation for f(x) from a recurrence for F(n) = M[f](n),
/// the finite Mellin transform over (0,1). Substitution homomorphism
/// S -> X (multiply by x), n -> -(xD + 1); each term p_k(n) S^k maps to
/// p_k(-(xD+1)) composed with X^k. Boundary terms from integration by
/// parts are assumed to vanish; the pipeline certifies each instance
/// numerically.
inline DiffOp recurrence_to_ode(const RecOp& rec) {
    if (rec.is_zero()) throw std::domain_error("recurrence_to_ode: zero recurrence");
    RatOp t({RatFun(Rat(-1)), RatFun(Poly::monomial(Rat(-1), 1))});  // -(xD+1)
    RatOp x_mul({RatFun(Poly::variable())});
    RatOp total = RatOp::zero();
    RatOp xk = RatOp::identity();
    for (int k = 0; k <= rec.order(); ++k) {
        const Poly& p = rec.coeff(k);
        if (!p.is_zero()) {
            // Horner: p(t)
            RatOp pt = RatOp::zero();
            for (int i = p.degree(); i >= 0; --i) {
                pt = pt * t;
                pt = pt + RatOp({RatFun(p.coeff(i))});
            }
            total = total + pt * xk;
        }
        xk = x_mul * xk;
    }
    return DiffOp(total);
}

/// Recurrence satisfied by the power-series coefficients of any series
/// solution of the ODE: x^a D^j contributes c * ff(n+j-a, j) f_{n+j-a}.
inline RecOp ode_to_recurrence(const DiffOp& ode) {
    if (ode.is_zero()) throw std::domain_error("ode_to_recurrence: zero operator");
    // collect terms by shift k = j - a; shifts can be negative, so build on
    // a shifted index first.
    int d = ode.order();
    int maxdeg = 0;
    for (int j = 0; j <= d; ++j) maxdeg = std::max(maxdeg, ode.coeff(j).degree());
    int kmin = -maxdeg, kmax = d;
    std::vector<Poly> terms(kmax - kmin + 1);
    for (int j = 0; j <= d; ++j) {
        const Poly& q = ode.coeff(j);
        for (int a = 0; a <= q.degree(); ++a) {
            Rat c = q.coeff(a);
            if (c == 0) continue;
            int k = j - a;
            // ff(n+k, j) = (n+k)(n+k-1)...(n+k-j+1)
            Poly ff(Rat(1));
            for (int i = 0; i < j; ++i)
                ff *= Poly(std::vector<Rat>{Rat(k - i), Rat(1)});
            terms[k - kmin] += c * ff;
        }
    }
    // re-center so the lowest present shift becomes 0
    int lo = 0;
    while (lo < static_cast<int>(terms.size()) && terms[lo].is_zero()) ++lo;
    if (lo == static_cast<int>(terms.size()))
        throw std::domain_error("ode_to_recurrence: zero image");
    std::vector<Poly> out;
    for (int i = lo; i < static_cast<int>(terms.size()); ++i)
        out.push_back(terms[i].shift(Rat(-(lo + kmin))));
    return RecOp(std::move(out));
}

/// Exact division kernel (x^n - a^n)/(x - a); lets integrands with a
/// removable interior singularity be evaluated without cancellation.
inline Poly regularized_kernel(long n, const Rat& a) {
    if (n < 1) throw std::domain_error("regularized_kernel: need n >= 1");
    std::vector<Rat> c(static_cast<std::size_t>(n), Rat(0));
    Rat an(1);
    for (long k = n - 1; k >= 0; --k) {
        c[k] = an;
        an *= a;
    }
    return Poly(std::move(c));
}

}  // namespace invmellin
