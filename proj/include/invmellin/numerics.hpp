#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "invmellin/closedform.hpp"
#include "invmellin/diffop.hpp"
#include "invmellin/mellin.hpp"
#include "invmellin/quadrature.hpp"
#include "invmellin/ratint.hpp"
#include "invmellin/recop.hpp"
#include "invmellin/sexpr.hpp"

namespace invmellin {

struct PoleHit : std::runtime_error {
    PoleHit() : std::runtime_error("expression pole hit during evaluation") {}
};
struct SingularSystem : std::runtime_error {
    SingularSystem() : std::runtime_error("fitting system is numerically singular") {}
};

inline Real pow_real_int(const Real& b, long n) {
    Real r(1), base = b;
    unsigned long m = n < 0 ? static_cast<unsigned long>(-n) : static_cast<unsigned long>(n);
    while (m) {
        if (m & 1) r *= base;
        base *= base;
        m >>= 1;
    }
    return n < 0 ? Real(1) / r : r;
}

/// Expression evaluator over (0,1) with nested tanh-sinh quadrature for
/// IntegralFrom nodes. Integrals from 0 are computed directly for upper
/// limits <= 0.6 and as I(1) - tail otherwise, with I(1) cached per
/// integrand; this keeps outer quadrature over many nodes affordable.
class Evaluator {
  public:
    explicit Evaluator(unsigned decimal_digits) : digits_(decimal_digits) {}

    unsigned digits() const { return digits_; }

    Real eval(const ExprPtr& e, const Real& x) const {
        // a point carrying a low working precision would propagate through
        // mpfr arithmetic; widen it (value preserved, unlike rounding down,
        // which would wreck boosted-precision quadrature nodes near 1)
        Real xx = x;
        if (xx.precision() < static_cast<int>(digits_) + 10)
            xx.precision(static_cast<int>(digits_) + 10);
        // constants materialized inside the tree must match the point's
        // precision, or endpoint cancellations like 1-sqrt(1-x) collapse
        PrecisionGuard guard(static_cast<unsigned>(xx.precision()));
        return eval_expr_with<Real>(
            e, xx,
            [this](const Rat& base, const ExprPtr& g, const Real& up) {
                return integral_real(base, g, up);
            },
            [this](const RatFun& f, const Real& at) { return expint_real(f, at); });
    }

    Cplx eval_c(const ExprPtr& e, const Real& x) const {
        Real xx = x;
        if (xx.precision() < static_cast<int>(digits_) + 10)
            xx.precision(static_cast<int>(digits_) + 10);
        PrecisionGuard guard(static_cast<unsigned>(xx.precision()));
        return eval_expr_with<Cplx>(
            e, Cplx(xx),
            [this](const Rat& base, const ExprPtr& g, const Cplx& up) {
                if (up.im != 0) throw std::domain_error("complex integration limit");
                return integral_cplx(base, g, up.re);
            },
            [this](const RatFun& f, const Cplx& at) {
                if (at.im != 0) throw std::domain_error("complex ExpIntRat argument");
                return Cplx(expint_real(f, at.re));
            });
    }

    /// Real value of an expression that may pass through complex
    /// intermediates; the imaginary part must cancel.
    Real eval_real_valued(const ExprPtr& e, const Real& x) const {
        Cplx v = eval_c(e, x);
        Real tol = pow(Real(10), -static_cast<int>(digits_) + 5);
        if (abs(v.im) > tol * (1 + abs(v.re)))
            throw std::domain_error("eval_real_valued: imaginary part did not cancel");
        return v.re;
    }

  private:
    Real expint_real(const RatFun& f, const Real& at) const {
        // exp of the path integral from the base point 1/2; the ambient
        // constant factor is immaterial for solution bases
        TanhSinh quad(digits_);
        Real len = at - Real(1) / 2;
        if (len == 0) return Real(1);
        Real v = quad.integrate([&](const Real& u, const Real&) {
            return f.eval<Real>(Real(1) / 2 + len * u);
        });
        return exp(len * v);
    }

    Real integral_real(const Rat& base, const ExprPtr& g, const Real& up) const {
        auto f = [&](const Real& t) { return eval(g, t); };
        return integral_impl<Real, 1>(base, g, up, f)[0];
    }
    Cplx integral_cplx(const Rat& base, const ExprPtr& g, const Real& up) const {
        auto f = [&](const Real& t) { return eval_c(g, t); };
        auto v = integral_impl<Cplx, 2>(base, g, up, f);
        return v[0];
    }

    // component splitting so one quadrature drives scalar and complex paths
    static void put(std::vector<Real>& out, const Real& v) { out[0] = v; }
    static void put(std::vector<Real>& out, const Cplx& v) {
        out[0] = v.re;
        out[1] = v.im;
    }
    static Real get1(const std::vector<Real>& v, const Real*) { return v[0]; }
    static Cplx get1(const std::vector<Real>& v, const Cplx*) { return {v[0], v[1]}; }

    // node b + len*u at the combined precision of the operands: when the
    // limit sits 10^-d from an endpoint and the inner node another 10^-k
    // into its own corner, integrand cancellations like 1-t need d+k extra
    // digits, which a plain expression evaluated at ambient precision (or
    // at the precision of its leftmost operand) does not carry
    static Real affine_node(const Real& b, const Real& len, const Real& u) {
        Real t = u;
        t.precision(t.precision() + std::max(b.precision(), len.precision()));
        t *= len;
        t += b;
        return t;
    }

    template <class T, std::size_t M, class F>
    std::array<T, 1> integral_impl(const Rat& base, const ExprPtr& g, const Real& up, F&& f) const {
        TanhSinh quad(digits_);
        Real b = rat_cast<Real>(base);
        if (base == 0 && up > Real(0.6)) {
            // I(up) = I(1) - int_up^1, endpoint distances kept exact
            T i1 = full_integral<T, M>(g, f);
            Real len = 1 - up;
            auto tail = quad.integrate_vec(
                [&](const Real& u, const Real& omu, std::vector<Real>& out) {
                    (void)omu;
                    put(out, f(affine_node(up, len, u)));
                },
                M);
            T tv = get1(tail, static_cast<const T*>(nullptr));
            return {i1 - T(len) * tv};
        }
        Real len = up - b;
        if (len == 0) return {T(0)};
        auto v = quad.integrate_vec(
            [&](const Real& u, const Real& omu, std::vector<Real>& out) {
                (void)omu;
                put(out, f(affine_node(b, len, u)));
            },
            M);
        return {T(len) * get1(v, static_cast<const T*>(nullptr))};
    }

    template <class T, std::size_t M, class F>
    T full_integral(const ExprPtr& g, F&& f) const {
        std::string key = to_sexpr(g) + "#" + std::to_string(digits_);
        auto& cache = cache_for(static_cast<const T*>(nullptr));
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        TanhSinh quad(digits_);
        auto v = quad.integrate_vec(
            [&](const Real& x, const Real& omx, std::vector<Real>& out) {
                (void)omx;
                put(out, f(x));
            },
            M);
        T r = get1(v, static_cast<const T*>(nullptr));
        cache.emplace(key, r);
        return r;
    }

    std::map<std::string, Real>& cache_for(const Real*) const { return rcache_; }
    std::map<std::string, Cplx>& cache_for(const Cplx*) const { return ccache_; }

    unsigned digits_;
    mutable std::map<std::string, Real> rcache_;
    mutable std::map<std::string, Cplx> ccache_;
};

/// Detects fractional powers of negative radicands on (0,1); such
/// expressions need the complex evaluation path. Probed with a dummy
/// integral handler so no quadrature is spent on the check.
inline bool needs_complex(const ExprPtr& e) {
    auto dummy_quad = [](const Rat&, const ExprPtr&, const double& up) { return up; };
    auto dummy_expint = [](const RatFun&, const double&) { return 1.0; };
    std::function<bool(const ExprPtr&)> walk = [&](const ExprPtr& n) -> bool {
        if (n->kind == ExprKind::Pow && !is_integer(n->value)) {
            for (double x : {0.15, 0.5, 0.85}) {
                try {
                    double b = eval_expr_with<double>(n->kids[0], x, dummy_quad, dummy_expint);
                    if (b < 0) return true;
                } catch (const std::exception&) {
                }
            }
        }
        for (const auto& k : n->kids)
            if (walk(k)) return true;
        return false;
    };
    return walk(e);
}

/// eval_expr with the two-precision error heuristic from the module
/// contract: recompute at digits+10 and compare.
inline Real eval_expr(const ExprPtr& e, const Real& x, unsigned digits, Real* err_out = nullptr) {
    Evaluator lo(digits), hi(digits + 10);
    Real a = lo.eval(e, x);
    if (err_out) {
        Real b = hi.eval(e, x);
        *err_out = abs(a - b);
    }
    return a;
}

/// Finite Mellin moments int_0^1 x^n f dx for a window of n, sharing the
/// basis evaluation across moments. With `regular_at`, the kernel x^n is
/// replaced by (x^n - a^n)/(x - a) * (x - a); the polynomial part is
/// evaluated by the exact division kernel so a removable singularity of f
/// at a causes no cancellation.
inline std::vector<Real> quad_mellin_multi(const Evaluator& ev, const ExprPtr& e,
                                           const std::vector<long>& ns,
                                           std::optional<Rat> regular_at = std::nullopt,
                                           Real* err_out = nullptr) {
    bool real_ok = !needs_complex(e);
    std::vector<Poly> kernels;
    if (regular_at)
        for (long n : ns) kernels.push_back(regularized_kernel(n, *regular_at));
    TanhSinh quad(ev.digits());
    auto g = [&](const Real& x, const Real& omx, std::vector<Real>& out) {
        (void)omx;
        Real fx = real_ok ? ev.eval(e, x) : ev.eval_real_valued(e, x);
        if (regular_at) {
            Real shift = x - rat_cast<Real>(*regular_at);
            Real w = shift * fx;
            for (std::size_t i = 0; i < ns.size(); ++i) out[i] = kernels[i].eval<Real>(x) * w;
        } else {
            for (std::size_t i = 0; i < ns.size(); ++i) out[i] = pow_real_int(x, ns[i]) * fx;
        }
    };
    return quad.integrate_vec(g, ns.size(), err_out);
}

inline Real quad_mellin(const ExprPtr& e, long n, unsigned digits) {
    Evaluator ev(digits);
    return quad_mellin_multi(ev, e, {n})[0];
}

struct FitResult {
    std::vector<Real> constants;
    std::vector<ExprPtr> exact;  // recognized closed forms, may hold nullptrs
    Real residual = 0;           // max relative defect on held-out window part
    std::vector<long> window;
    unsigned digits = 0;
};

struct VerificationReport {
    struct MellinCheck {
        long n;
        Real lhs, rhs, rel_err;
    };
    std::vector<Real> ode_residuals;
    std::vector<MellinCheck> mellin_checks;
    Real quadrature_error_estimate = 0;
    Real tolerance = 0;
    bool pass = false;
};

/// Relative residual of L applied to e at each point.
inline std::vector<Real> verify_ode_residual(const ExprPtr& e, const DiffOp& L,
                                             const std::vector<Real>& points, unsigned digits) {
    PrecisionGuard guard(digits + 10);
    Evaluator ev(digits);
    std::vector<ExprPtr> derivs{e};
    for (int j = 1; j <= L.order(); ++j) derivs.push_back(differentiate(derivs.back()));
    bool real_ok = true;
    for (const auto& d : derivs) real_ok = real_ok && !needs_complex(d);
    std::vector<Real> out;
    for (const Real& x : points) {
        Real num(0), den(0);
        for (int j = 0; j <= L.order(); ++j) {
            Real dj = real_ok ? ev.eval(derivs[j], x) : ev.eval_real_valued(derivs[j], x);
            Real term = L.coeff(j).eval<Real>(x) * dj;
            num += term;
            den += abs(term);
        }
        out.push_back(den == 0 ? Real(0) : abs(num) / den);
    }
    return out;
}

namespace detail {

/// Lovasz-reduced basis, exact rational arithmetic, delta = 3/4.
inline void lll_reduce(std::vector<std::vector<Int>>& b) {
    std::size_t n = b.size();
    auto dot = [](const std::vector<Int>& u, const std::vector<Int>& v) {
        Rat s(0);
        for (std::size_t i = 0; i < u.size(); ++i) s += Rat(u[i]) * Rat(v[i]);
        return s;
    };
    std::vector<std::vector<Rat>> mu(n, std::vector<Rat>(n, Rat(0)));
    std::vector<Rat> B(n, Rat(0));
    auto gram = [&]() {
        std::vector<std::vector<Rat>> gs(n, std::vector<Rat>(b[0].size(), Rat(0)));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < b[i].size(); ++k) gs[i][k] = Rat(b[i][k]);
            for (std::size_t j = 0; j < i; ++j) {
                Rat num(0);
                for (std::size_t k = 0; k < b[i].size(); ++k) num += Rat(b[i][k]) * gs[j][k];
                mu[i][j] = B[j] == 0 ? Rat(0) : num / B[j];
                for (std::size_t k = 0; k < b[i].size(); ++k) gs[i][k] -= mu[i][j] * gs[j][k];
            }
            B[i] = Rat(0);
            for (std::size_t k = 0; k < b[i].size(); ++k) B[i] += gs[i][k] * gs[i][k];
        }
    };
    gram();
    std::size_t k = 1;
    int guard = 0;
    while (k < n && ++guard < 10000) {
        for (std::size_t j = k; j-- > 0;) {
            Rat m = mu[k][j];
            Int r = rat_floor(m + make_rat(1, 2));
            if (r != 0) {
                for (std::size_t t = 0; t < b[k].size(); ++t) b[k][t] -= r * b[j][t];
                gram();
            }
        }
        if (B[k] >= (make_rat(3, 4) - mu[k][k - 1] * mu[k][k - 1]) * B[k - 1]) {
            ++k;
        } else {
            std::swap(b[k], b[k - 1]);
            gram();
            if (k > 1) --k;
        }
    }
    (void)dot;
}

}  // namespace detail

/// Bounded search for v = q0 + q1 pi + q2 sqrt3 pi + q3/pi + q4 sqrt3/pi
/// + q5 log 2, rational q_i with |numerator|, denominator <= 64. Returns the
/// recognized expression only when it reproduces v to 10^(10-p).
inline std::optional<ExprPtr> recognize_constant(const Real& v, unsigned digits) {
    if (digits < 30) throw std::domain_error("recognize_constant: need >= 30 digits");
    PrecisionGuard guard(digits + 10);
    Real pi = pi_real(), s3 = sqrt(Real(3)), l2 = log(Real(2));
    std::vector<Real> basis{Real(1), pi, s3 * pi, 1 / pi, s3 / pi, l2};
    std::vector<ExprPtr> basis_expr{
        ex_const(1),
        ex_pi(),
        ex_mul({ex_sqrtint(Int(3)), ex_pi()}),
        ex_pow(ex_pi(), Rat(-1)),
        ex_mul({ex_sqrtint(Int(3)), ex_pow(ex_pi(), Rat(-1))}),
        ex_log2(),
    };
    std::size_t m = basis.size();
    Real scale = pow(Real(10), static_cast<int>(digits) - 8);
    std::vector<std::vector<Int>> lat(m + 1, std::vector<Int>(m + 2, Int(0)));
    auto round_to_int = [](const Real& x) {
        Int z;
        mpfr_get_z(z.get_mpz_t(), Real(x).backend().data(), MPFR_RNDN);
        return z;
    };
    for (std::size_t i = 0; i < m; ++i) {
        lat[i][i] = 1;
        lat[i][m + 1] = round_to_int(basis[i] * scale);
    }
    lat[m][m] = 1;
    lat[m][m + 1] = round_to_int(v * scale);
    detail::lll_reduce(lat);
    Real tol = pow(Real(10), 10 - static_cast<int>(digits));
    for (const auto& row : lat) {
        const Int& av = row[m];
        if (av == 0) continue;
        bool ok = true;
        std::vector<Rat> q(m);
        for (std::size_t i = 0; i < m; ++i) {
            q[i] = make_rat(-row[i], av);
            if (abs(numer(q[i])) > 64 || denom(q[i]) > 64) ok = false;
        }
        if (!ok) continue;
        Real w(0);
        for (std::size_t i = 0; i < m; ++i) w += rat_cast<Real>(q[i]) * basis[i];
        if (abs(w - v) > tol * (1 + abs(v))) continue;
        std::vector<ExprPtr> terms;
        for (std::size_t i = 0; i < m; ++i)
            if (q[i] != 0) terms.push_back(ex_mul({ex_const(q[i]), basis_expr[i]}));
        if (terms.empty()) terms.push_back(ex_const(0));
        return normalize(ex_add(std::move(terms)));
    }
    return std::nullopt;
}

/// Least-window fit of basis constants against exact sequence values.
/// Solves on the first |basis| usable moments, reports the worst relative
/// defect on at least two held-out ones, and tries constant recognition.
inline FitResult fit_constants(const std::vector<ExprPtr>& basis, const SequenceSpec& seq,
                               unsigned digits, std::optional<Rat> regular_at = std::nullopt,
                               std::optional<long> window_lo = std::nullopt) {
    PrecisionGuard guard(digits + 10);
    Evaluator ev(digits);
    std::size_t k = basis.size();
    long extra = 2;
    long lo = window_lo.value_or(1);
    std::vector<long> ns;
    std::vector<std::vector<Real>> M;  // M[j] = moments of basis j over ns
    // find the smallest window where every basis moment converges
    for (long attempt = 0; attempt < 8 && M.empty(); ++attempt, ++lo) {
        ns.clear();
        for (long n = lo; n < lo + static_cast<long>(k) + extra; ++n) ns.push_back(n);
        try {
            std::vector<std::vector<Real>> cols;
            for (const auto& e : basis) cols.push_back(quad_mellin_multi(ev, e, ns, regular_at));
            M = std::move(cols);
        } catch (const DivergentIntegral&) {
            continue;
        }
    }
    if (M.empty()) throw DivergentIntegral();
    std::vector<Rat> fvals = extend_sequence(seq, ns.front(), ns.back());

    // solve the leading k x k system by Gaussian elimination
    std::vector<std::vector<Real>> A(k, std::vector<Real>(k + 1));
    for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t c = 0; c < k; ++c) A[r][c] = M[c][r];
        A[r][k] = rat_cast<Real>(fvals[r]);
    }
    Real tiny = pow(Real(10), -static_cast<int>(digits));
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < k; ++r)
            if (abs(A[r][c]) > abs(A[p][c])) p = r;
        if (abs(A[p][c]) < tiny) throw SingularSystem();
        std::swap(A[c], A[p]);
        for (std::size_t r = 0; r < k; ++r) {
            if (r == c) continue;
            Real f = A[r][c] / A[c][c];
            for (std::size_t t = c; t <= k; ++t) A[r][t] -= f * A[c][t];
        }
    }
    FitResult fit;
    fit.digits = digits;
    fit.window = ns;
    for (std::size_t c = 0; c < k; ++c) fit.constants.push_back(A[c][k] / A[c][c]);

    // held-out residual
    Real res(0);
    for (std::size_t r = k; r < ns.size(); ++r) {
        Real pred(0), mag(0);
        for (std::size_t c = 0; c < k; ++c) {
            Real t = fit.constants[c] * M[c][r];
            pred += t;
            mag += abs(t);
        }
        Real fv = rat_cast<Real>(fvals[r]);
        Real am = abs(fv);
        Real denom_mag = am > mag ? am : mag;
        if (denom_mag == 0) denom_mag = 1;
        Real rr = abs(pred - fv) / denom_mag;
        if (rr > res) res = rr;
    }
    fit.residual = res;
    for (const auto& c : fit.constants) {
        std::optional<ExprPtr> e = recognize_constant(c, digits);
        fit.exact.push_back(e ? *e : nullptr);
    }
    return fit;
}

}  // namespace invmellin
