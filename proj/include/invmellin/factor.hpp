#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "invmellin/hyperexp.hpp"
#include "invmellin/numerics.hpp"

namespace invmellin {

struct IrreducibleHighOrder : std::runtime_error {
    explicit IrreducibleHighOrder(const std::string& what) : std::runtime_error(what) {}
};

struct WronskianVanishes : std::runtime_error {
    explicit WronskianVanishes(const std::string& what) : std::runtime_error(what) {}
};

/// L = left_chain * core * reversed(right_chain), all factors first order
/// except the optional order-2 core; right_chain is rightmost first.
struct Factorization {
    std::vector<std::pair<DiffOp, HyperexpTerm>> right_chain;
    std::optional<DiffOp> core;
    std::vector<DiffOp> left_chain;  // leftmost first

    DiffOp reconstruct() const {
        RatOp prod = RatOp::identity();
        for (const auto& q : left_chain) prod = prod * q.to_ratop();
        if (core) prod = prod * core->to_ratop();
        for (auto it = right_chain.rbegin(); it != right_chain.rend(); ++it)
            prod = prod * it->first.to_ratop();
        return DiffOp(prod);
    }
};

struct SolutionBasis {
    std::vector<ExprPtr> solutions;
    std::vector<std::string> provenance;
    Real wronskian{0};
    unsigned digits{0};
};

/// Numeric Wronskian det[y_i^{(j)}] at x0 = 1/2.
inline Real numeric_wronskian(const std::vector<ExprPtr>& ys, unsigned digits) {
    PrecisionGuard guard(digits + 10);
    Evaluator ev(digits);
    Real x0 = Real(1) / 2;
    std::size_t n = ys.size();
    std::vector<std::vector<Real>> m(n, std::vector<Real>(n, Real(0)));
    for (std::size_t i = 0; i < n; ++i) {
        ExprPtr d = ys[i];
        for (std::size_t j = 0; j < n; ++j) {
            if (j > 0) d = differentiate(d);
            m[i][j] = needs_complex(d) ? ev.eval_real_valued(d, x0) : ev.eval(d, x0);
        }
    }
    // Gaussian elimination with partial pivoting
    Real det(1);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (abs(m[r][c]) > abs(m[p][c])) p = r;
        if (m[p][c] == 0) return Real(0);
        if (p != c) {
            std::swap(m[p], m[c]);
            det = -det;
        }
        det *= m[c][c];
        for (std::size_t r = c + 1; r < n; ++r) {
            Real f = m[r][c] / m[c][c];
            for (std::size_t t = c; t < n; ++t) m[r][t] -= f * m[c][t];
        }
    }
    return det;
}

namespace detail {

/// D - u with cleared denominators.
inline DiffOp first_order_factor(const RatFun& u) {
    return DiffOp(RatOp({RatFun(0) - u, RatFun(1)}));
}

inline DiffOp exact_right_quotient(const DiffOp& a, const DiffOp& b) {
    auto [q, r] = op_right_divmod(a.to_ratop(), b.to_ratop());
    if (!r.is_zero()) throw std::logic_error("exact_right_quotient: nonzero remainder");
    return DiffOp(q);
}

/// Integral from 0 when the integrand is integrable there, else from 1/2.
/// The structural exponent bound can be fooled by cancellation inside
/// negative powers, so a cheap quadrature probe confirms convergence.
inline ExprPtr integral_from(const ExprPtr& integrand) {
    auto est = local_exponent_at_zero(integrand);
    Rat base = (est && *est > -1) ? Rat(0) : make_rat(1, 2);
    ExprPtr cand = ex_integral(base, "t", integrand);
    if (base == 0) {
        try {
            PrecisionGuard guard(25);
            Evaluator ev(15);
            if (needs_complex(cand))
                ev.eval_real_valued(cand, Real(1) / 2);
            else
                ev.eval(cand, Real(1) / 2);
        } catch (const DivergentIntegral&) {
            cand = ex_integral(make_rat(1, 2), "t", integrand);
        }
    }
    return cand;
}

}  // namespace detail

/// Peels first-order right factors D - (log-derivative) while
/// hyperexponential solutions exist, always choosing the candidate of
/// smallest exponent height (ties by lexicographic order, already the
/// hyperexp_solutions ordering). An order-2 remainder becomes the core; a
/// higher-order remainder is attacked from the left through the adjoint.
inline Factorization factor_chain(const DiffOp& L) {
    if (L.is_zero() || L.order() < 1)
        throw std::domain_error("factor_chain: operator order must be >= 1");
    Factorization f;
    DiffOp cur = L;
    while (cur.order() >= 1) {
        std::vector<HyperexpTerm> hy;
        try {
            hy = hyperexp_solutions(cur);
        } catch (const UnsupportedSingularity&) {
            // the hyperexp search needs rational regular singular points,
            // but kovacic does not; at low order hand the operator over as
            // the core instead of giving up
            if (cur.order() > 2) throw;
            f.core = cur;
            return f;
        }
        if (!hy.empty()) {
            RatFun u = hy.front().certificate();
            DiffOp q = detail::first_order_factor(u);
            f.right_chain.emplace_back(q, hy.front());
            cur = detail::exact_right_quotient(cur, q);
            continue;
        }
        if (cur.order() <= 2) {
            f.core = cur;
            return f;
        }
        DiffOp adj = op_adjoint(cur);
        auto hya = hyperexp_solutions(adj);
        if (hya.empty())
            throw IrreducibleHighOrder("no factor on either side at order " +
                                       std::to_string(cur.order()));
        DiffOp qa = detail::first_order_factor(hya.front().certificate());
        DiffOp quot = detail::exact_right_quotient(adj, qa);
        f.left_chain.push_back(op_adjoint(qa));
        cur = op_adjoint(quot);
    }
    return f;
}

/// d'Alembertian basis f1, f1 int f2/f1, f1 int (f2/f1) int (f3/f2), ...
/// for a chain of monic first-order factors D - a_i (rightmost first) with
/// f_i = e^{int a_i}.
inline SolutionBasis compose_dalembertian(const std::vector<ExprPtr>& chain_solutions,
                                          unsigned digits = 30) {
    SolutionBasis basis;
    std::size_t d = chain_solutions.size();
    for (std::size_t k = 1; k <= d; ++k) {
        ExprPtr nest;
        for (std::size_t i = k; i >= 2; --i) {
            ExprPtr ratio = normalize(ex_mul(
                {chain_solutions[i - 1], ex_pow(chain_solutions[i - 2], Rat(-1))}));
            ExprPtr inner = nest ? normalize(ex_mul({ratio, nest})) : ratio;
            nest = detail::integral_from(inner);
        }
        ExprPtr y = nest ? normalize(ex_mul({chain_solutions[0], nest})) : chain_solutions[0];
        basis.solutions.push_back(y);
        basis.provenance.push_back("chain factors 1.." + std::to_string(k));
    }
    basis.digits = digits;
    basis.wronskian = numeric_wronskian(basis.solutions, digits);
    return basis;
}

/// Basis of P2 * q from a solution s of the right factor q = q1 D + q0 and
/// solutions g1, g2 of the left factor P2: {s, s int g1/(q1 s),
/// s int g2/(q1 s)}. For monic q the integrands reduce to g_i/s.
inline SolutionBasis compose_core_right_of_chain(const ExprPtr& s, const DiffOp& q,
                                                 const ExprPtr& g1, const ExprPtr& g2,
                                                 const DiffOp& p2, unsigned digits = 30) {
    if (q.order() != 1) throw std::domain_error("compose_core_right_of_chain: q must be order 1");
    if (p2.order() != 2)
        throw std::domain_error("compose_core_right_of_chain: P2 must be order 2");
    ExprPtr q1inv = ex_pow(poly_to_expr(q.leading()), Rat(-1));
    ExprPtr sinv = ex_pow(s, Rat(-1));
    SolutionBasis basis;
    basis.solutions.push_back(s);
    basis.provenance.push_back("right factor");
    int i = 1;
    for (const ExprPtr& g : {g1, g2}) {
        ExprPtr integrand = normalize(ex_mul({g, q1inv, sinv}));
        basis.solutions.push_back(normalize(ex_mul({s, detail::integral_from(integrand)})));
        basis.provenance.push_back("right factor + core solution " + std::to_string(i++));
    }
    basis.digits = digits;
    basis.wronskian = numeric_wronskian(basis.solutions, digits);
    return basis;
}

/// Basis of Q * P2 from solutions g1, g2 of the right factor
/// P2 = p2 D^2 + p1 D + p0 and a solution s of the left factor Q: the
/// third element is the classical variation-of-parameters solution
/// y = -g1 int g2 s/(p2 W) + g2 int g1 s/(p2 W), with the Wronskian W taken
/// from Abel's identity (exp(-int p1/p2), constant immaterial since Q kills
/// any constant multiple of s).
inline SolutionBasis compose_core_left_of_chain(const ExprPtr& g1, const ExprPtr& g2,
                                                const DiffOp& p2op, const ExprPtr& s,
                                                const DiffOp& qop, unsigned digits = 30) {
    if (p2op.order() != 2)
        throw std::domain_error("compose_core_left_of_chain: P2 must be order 2");
    if (qop.order() != 1) throw std::domain_error("compose_core_left_of_chain: Q must be order 1");
    Real w = numeric_wronskian({g1, g2}, digits);
    PrecisionGuard guard(digits + 10);
    if (abs(w) <= pow(Real(10), -static_cast<int>(digits) / 2))
        throw WronskianVanishes("Wronskian of g1, g2 vanishes at x0 = 1/2");
    RatFun p1 = RatFun(p2op.coeff(1)), p2 = RatFun(p2op.coeff(2));
    ExprPtr wexpr = exp_integral_expr(RatFun(-1) * p1 / p2);
    ExprPtr winv = ex_pow(wexpr, Rat(-1));
    ExprPtr p2inv = ex_pow(poly_to_expr(p2op.coeff(2)), Rat(-1));
    ExprPtr i2 = detail::integral_from(normalize(ex_mul({g2, s, p2inv, winv})));
    ExprPtr i1 = detail::integral_from(normalize(ex_mul({g1, s, p2inv, winv})));
    ExprPtr y = normalize(
        ex_add({ex_mul({ex_const(-1), g1, i2}), ex_mul({g2, i1})}));
    SolutionBasis basis;
    basis.solutions = {g1, g2, y};
    basis.provenance = {"core solution 1", "core solution 2", "variation of parameters"};
    basis.digits = digits;
    basis.wronskian = numeric_wronskian(basis.solutions, digits);
    return basis;
}

}  // namespace invmellin
