#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "invmellin/factor.hpp"
#include "invmellin/mellin.hpp"
#include "invmellin/recop.hpp"

namespace invmellin {

enum class PipelineStatus { Certified, PartialBasis, Unsolved };

inline std::string to_string(PipelineStatus s) {
    switch (s) {
        case PipelineStatus::Certified: return "Certified";
        case PipelineStatus::PartialBasis: return "PartialBasis";
        default: return "Unsolved";
    }
}

struct InverseMellinResult {
    PipelineStatus status = PipelineStatus::Unsolved;
    DiffOp ode;
    Factorization factorization;
    SolutionBasis basis;
    FitResult fit;
    VerificationReport report;
    ExprPtr expr;
    std::vector<std::string> diagnostics;
};

namespace detail {

/// Rational value of a decimal string d[.ddd][e+-k], as printed by Real::str.
inline Rat rat_from_decimal(const std::string& s) {
    std::size_t epos = s.find_first_of("eE");
    std::string mant = s.substr(0, epos);
    long e10 = epos == std::string::npos ? 0 : std::stol(s.substr(epos + 1));
    std::size_t dot = mant.find('.');
    if (dot != std::string::npos) {
        e10 -= static_cast<long>(mant.size() - dot - 1);
        mant.erase(dot, 1);
    }
    if (mant.empty() || mant.find_first_not_of("+-0123456789") != std::string::npos)
        throw std::domain_error("rat_from_decimal: not a finite decimal: " + s);
    Int num(mant);
    Int scale(1);
    for (long i = 0; i < (e10 < 0 ? -e10 : e10); ++i) scale *= 10;
    return e10 < 0 ? make_rat(num, scale) : Rat(num * scale);
}

inline Rat real_to_rat(const Real& v, unsigned digits) {
    return rat_from_decimal(v.str(static_cast<int>(digits), std::ios_base::scientific));
}

/// Smallest rational root of the ODE leading coefficient strictly inside
/// (0,1): quadrature around such a pole needs the regularized kernel.
inline std::optional<Rat> interior_singularity(const DiffOp& ode) {
    std::optional<Rat> best;
    for (const auto& [r, m] : rational_roots(ode.leading()))
        if (r > 0 && r < 1 && (!best || r < *best)) best = r;
    return best;
}

/// Solution of the first-order factor c1 D + c0.
inline ExprPtr first_order_solution(const DiffOp& q) {
    return exp_integral_expr(-(RatFun(q.coeff(0)) / RatFun(q.coeff(1))));
}

inline void append_mellin_checks(VerificationReport& rep, const SequenceSpec& seq,
                                 const ExprPtr& e, long lo, long hi, unsigned digits,
                                 std::optional<Rat> regular_at) {
    Evaluator ev(digits);
    std::vector<long> ns;
    for (long n = lo; n <= hi; ++n) ns.push_back(n);
    Real err(0);
    std::vector<Real> moments = quad_mellin_multi(ev, e, ns, regular_at, &err);
    if (err > rep.quadrature_error_estimate) rep.quadrature_error_estimate = err;
    std::vector<Rat> fvals = extend_sequence(seq, lo, hi);
    Real tiny = pow(Real(10), -static_cast<int>(digits));
    for (std::size_t i = 0; i < ns.size(); ++i) {
        Real lhs = rat_cast<Real>(fvals[i]);
        Real rhs = moments[i];
        Real den = abs(lhs) > tiny ? abs(lhs) : (abs(rhs) > tiny ? abs(rhs) : tiny);
        rep.mellin_checks.push_back({ns[i], lhs, rhs, abs(lhs - rhs) / den});
    }
}

/// Sample points in (0,1) away from the singularities of L.
inline std::vector<Real> residual_points(const DiffOp& L) {
    std::vector<Real> pts;
    for (const Rat& c : {make_rat(1, 5), make_rat(3, 10), make_rat(1, 2),
                         make_rat(7, 10), make_rat(4, 5)})
        if (L.leading().eval_rat(c) != 0) pts.push_back(rat_cast<Real>(c));
    return pts;
}

}  // namespace detail

/// Recurrence + initial values -> ODE -> factor/solve -> fitted integrand
/// for f with M[f](n) = f_n, numerically certified over the fitting window
/// plus held-out indices. Solver gaps surface as PartialBasis/Unsolved with
/// diagnostics, never as a fabricated answer.
inline InverseMellinResult inverse_mellin(const SequenceSpec& seq, unsigned digits = 50) {
    InverseMellinResult res;
    res.ode = recurrence_to_ode(seq.rec);
    unsigned wr_digits = std::min(digits, 30u);
    try {
        res.factorization = factor_chain(res.ode);
    } catch (const UnsupportedSingularity& e) {
        res.diagnostics.push_back(std::string("unsupported singularity: ") + e.what());
        return res;
    } catch (const IrreducibleHighOrder& e) {
        res.diagnostics.push_back(std::string("irreducible high-order factor: ") + e.what());
        return res;
    }
    const Factorization& f = res.factorization;

    // innermost block: the core, if present
    std::vector<ExprPtr> inner;
    std::vector<std::string> prov;
    bool core_solved = true;
    if (f.core) {
        if (f.core->order() == 1) {
            inner.push_back(detail::first_order_solution(*f.core));
            prov.push_back("first-order core");
        } else {
            KovacicResult kr = kovacic(*f.core);
            switch (kr.case_tag) {
                case KovacicCase::RationalOmega:
                case KovacicCase::QuadraticOmega:
                    inner = kr.solutions;
                    for (std::size_t i = 1; i <= inner.size(); ++i)
                        prov.push_back("core solution " + std::to_string(i));
                    break;
                case KovacicCase::UnsupportedCase3:
                    core_solved = false;
                    res.diagnostics.push_back("core unsolved");
                    res.diagnostics.push_back("UnsupportedCase3 core: " + kr.diagnostic);
                    break;
                case KovacicCase::NoLiouvillian:
                    core_solved = false;
                    res.diagnostics.push_back("core unsolved");
                    res.diagnostics.push_back("NoLiouvillian core");
                    break;
            }
        }
    }

    // left factors wrap the core through variation of parameters; only the
    // single-factor, order-2-core shape is composable in closed form
    if (!f.left_chain.empty()) {
        if (core_solved && f.left_chain.size() == 1 && f.core && f.core->order() == 2 &&
            inner.size() == 2) {
            const DiffOp& qop = f.left_chain[0];
            ExprPtr s = detail::first_order_solution(qop);
            try {
                SolutionBasis sb =
                    compose_core_left_of_chain(inner[0], inner[1], *f.core, s, qop, wr_digits);
                inner = sb.solutions;
                prov = sb.provenance;
            } catch (const WronskianVanishes& e) {
                res.diagnostics.push_back(std::string("left factor composition failed: ") +
                                          e.what());
            }
        } else if (core_solved) {
            res.diagnostics.push_back(
                "left factor composition needs a single order-2 core block");
        }
    }

    // each right factor q = q1 D + q0 with solution s wraps the basis:
    // q y = z  =>  y = s int z/(q1 s), plus s itself
    std::vector<ExprPtr> basis = inner;
    int level = 0;
    for (auto it = f.right_chain.rbegin(); it != f.right_chain.rend(); ++it) {
        ++level;
        ExprPtr s = it->second.expr();
        ExprPtr q1inv = ex_pow(poly_to_expr(it->first.leading()), Rat(-1));
        ExprPtr sinv = ex_pow(s, Rat(-1));
        std::vector<ExprPtr> nb{s};
        std::vector<std::string> np{"right factor " + std::to_string(level)};
        for (std::size_t i = 0; i < basis.size(); ++i) {
            ExprPtr integrand = normalize(ex_mul({basis[i], q1inv, sinv}));
            nb.push_back(normalize(ex_mul({s, detail::integral_from(integrand)})));
            np.push_back(prov[i] + ", right factor " + std::to_string(level));
        }
        basis = std::move(nb);
        prov = std::move(np);
    }

    res.basis.solutions = basis;
    res.basis.provenance = prov;
    res.basis.digits = wr_digits;
    if (basis.empty()) {
        if (res.diagnostics.empty()) res.diagnostics.push_back("no solutions found");
        return res;
    }
    res.basis.wronskian = numeric_wronskian(basis, wr_digits);
    if (static_cast<int>(basis.size()) < res.ode.order()) {
        res.status = PipelineStatus::PartialBasis;
        return res;
    }

    std::optional<Rat> regular_at = detail::interior_singularity(res.ode);
    try {
        res.fit = fit_constants(basis, seq, digits, regular_at);
    } catch (const DivergentIntegral& e) {
        res.diagnostics.push_back(std::string("fitting failed: ") + e.what());
        return res;
    }

    PrecisionGuard guard(digits + 10);
    Real drop = pow(Real(10), -static_cast<int>(digits) / 2);
    std::vector<ExprPtr> terms;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        if (abs(res.fit.constants[i]) <= drop) continue;
        ExprPtr c = res.fit.exact[i]
                        ? res.fit.exact[i]
                        : ex_const(detail::real_to_rat(res.fit.constants[i], digits));
        terms.push_back(normalize(ex_mul({c, basis[i]})));
    }
    res.expr = terms.empty() ? ex_const(0)
                             : normalize(terms.size() == 1 ? terms[0] : ex_add(terms));

    res.report.tolerance = drop;
    try {
        detail::append_mellin_checks(res.report, seq, res.expr, res.fit.window.front(),
                                     res.fit.window.back() + 4, digits, regular_at);
    } catch (const DivergentIntegral& e) {
        res.diagnostics.push_back(std::string("verification failed: ") + e.what());
        return res;
    }
    res.report.ode_residuals =
        verify_ode_residual(res.expr, res.ode, detail::residual_points(res.ode), digits);
    bool ok = res.fit.residual <= res.report.tolerance;
    for (const auto& c : res.report.mellin_checks) ok = ok && c.rel_err <= res.report.tolerance;
    for (const Real& r : res.report.ode_residuals) ok = ok && r <= res.report.tolerance;
    res.report.pass = ok;
    if (ok) {
        res.status = PipelineStatus::Certified;
    } else {
        res.diagnostics.push_back("verification failed: residual above tolerance");
    }
    return res;
}

/// Checks M[claimed](n) against the exactly extended sequence for each n in
/// [n_lo, n_hi].
inline VerificationReport verify_identity(const SequenceSpec& seq, const ExprPtr& claimed,
                                          long n_lo, long n_hi, unsigned digits = 30,
                                          std::optional<double> tol = std::nullopt,
                                          std::optional<Rat> regular_at = std::nullopt) {
    if (n_hi < n_lo) throw std::domain_error("verify_identity: empty window");
    PrecisionGuard guard(digits + 10);
    VerificationReport rep;
    rep.tolerance = tol ? Real(*tol) : pow(Real(10), -static_cast<int>(digits) / 2);
    detail::append_mellin_checks(rep, seq, claimed, n_lo, n_hi, digits, regular_at);
    rep.pass = true;
    for (const auto& c : rep.mellin_checks) rep.pass = rep.pass && c.rel_err <= rep.tolerance;
    return rep;
}

}  // namespace invmellin
