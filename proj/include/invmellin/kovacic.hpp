#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "invmellin/diffop.hpp"
#include "invmellin/radical.hpp"

namespace invmellin {

/// Candidate data (pole residues or square-root coefficients) left the
/// rational ground field; the case search cannot decide over Q.
struct UnsupportedPoleField : std::runtime_error {
    explicit UnsupportedPoleField(const std::string& what) : std::runtime_error(what) {}
};

enum class KovacicCase { RationalOmega, QuadraticOmega, UnsupportedCase3, NoLiouvillian };

/// y'' = r y together with the gauge factor mapping normal-form solutions
/// back to solutions of the original operator: f = gauge * y.
struct NormalForm {
    RatFun r;
    RatFun v;       // p1/(2 p2); gauge = e^{-int v}
    ExprPtr gauge;
};

struct KovacicResult {
    KovacicCase case_tag = KovacicCase::NoLiouvillian;
    std::optional<RatFun> omega;                       // case 1
    std::optional<std::pair<RatFun, RatFun>> quad;     // case 2: w^2 + a w + b = 0
    std::vector<ExprPtr> solutions;                    // for the original operator
    std::string certificate;
    std::string diagnostic;
};

inline NormalForm to_normal_form(const DiffOp& L2) {
    if (L2.order() != 2) throw std::domain_error("to_normal_form: order-2 operator required");
    RatFun p0(L2.coeff(0)), p1(L2.coeff(1)), p2(L2.coeff(2));
    RatFun v = p1 / (RatFun(2) * p2);
    RatFun r = v * v + v.derivative() - p0 / p2;
    return {r, v, exp_integral_expr(-v)};
}

namespace detail {

struct KovPole {
    Rat c;
    int order;
    Rat b;                     // coefficient of (x-c)^-2 (orders 1 and 2: order 1 has b unused)
    std::vector<Rat> sqrt_part;  // a_2..a_v of [sqrt r]_c for even order 2v >= 4
    Rat a_lead;                // a_v
    Rat bres;                  // coefficient of (x-c)^-(v+1) in r - [sqrt r]_c^2
};

struct PoleAnalysis {
    std::vector<KovPole> poles;
    std::vector<int> irrational_orders;  // one entry per irrational pole
    int oinf;                            // order of r at infinity
    // expansion data at infinity
    Rat binf;                  // for oinf == 2: lim x^2 r
    std::vector<Rat> inf_poly;  // a_0..a_v of [sqrt r]_inf for oinf = -2v <= 0
    Rat inf_a_lead, inf_bres;
    bool inf_sqrt_rational = true;
};

inline PoleAnalysis analyze_poles(const RatFun& r) {
    PoleAnalysis pa;
    pa.oinf = r.valuation_at_infinity();
    for (const auto& [q, m] : squarefree_decomposition(r.den())) {
        auto [roots, rest] = split_rational_roots(q);
        for (const auto& [c, mult] : roots) {
            (void)mult;  // squarefree: always 1
            KovPole p;
            p.c = c;
            p.order = m;
            if (m <= 2) {
                auto [shift, ser] = laurent_at(r, c, 3);
                p.b = shift <= -2 ? ser.at(static_cast<std::size_t>(-2 - shift)) : Rat(0);
            } else if (m % 2 == 0) {
                int v = m / 2;
                auto [shift, ser] = laurent_at(r, c, static_cast<std::size_t>(v + 2));
                // match (sum_{j=2..v} a_j (x-c)^-j)^2 against r down to
                // exponent -(v+2), exposing b at -(v+1)
                std::vector<Rat> a(static_cast<std::size_t>(v + 1), Rat(0));  // a[j], j=2..v
                auto rc = [&](int e) {  // coefficient of (x-c)^e in r
                    int idx = e - shift;
                    return idx >= 0 ? ser.at(static_cast<std::size_t>(idx)) : Rat(0);
                };
                auto sq = rat_sqrt(rc(-2 * v));
                if (!sq)
                    throw UnsupportedPoleField("irrational leading square root at x = " +
                                               rat_to_string(c));
                a[static_cast<std::size_t>(v)] = *sq;
                for (int mtick = 1; mtick <= v - 2; ++mtick) {
                    // exponent -(2v - m'): 2 a_v a_{v-m'} + known = rc; pairs
                    // touching index v are exactly the unknown ones
                    Rat known(0);
                    for (int j = 2; j <= v; ++j)
                        for (int k = 2; k <= v; ++k)
                            if (j + k == 2 * v - mtick && j != v && k != v)
                                known +=
                                    a[static_cast<std::size_t>(j)] * a[static_cast<std::size_t>(k)];
                    a[static_cast<std::size_t>(v - mtick)] =
                        (rc(-(2 * v - mtick)) - known) / (2 * a[static_cast<std::size_t>(v)]);
                }
                // b = coefficient of (x-c)^-(v+1) in r - theta^2
                Rat theta2(0);
                for (int j = 2; j <= v; ++j)
                    for (int k = 2; k <= v; ++k)
                        if (j + k == v + 1)
                            theta2 += a[static_cast<std::size_t>(j)] * a[static_cast<std::size_t>(k)];
                p.bres = rc(-(v + 1)) - theta2;
                p.a_lead = a[static_cast<std::size_t>(v)];
                p.sqrt_part.assign(a.begin() + 2, a.end());
            }
            pa.poles.push_back(std::move(p));
        }
        if (rest.degree() > 0)
            for (int i = 0; i < rest.degree(); ++i) pa.irrational_orders.push_back(m);
    }
    std::sort(pa.poles.begin(), pa.poles.end(),
              [](const KovPole& x, const KovPole& y) { return x.c < y.c; });

    if (pa.oinf == 2) {
        auto [shift, ser] = laurent_at_infinity(r, 1);
        (void)shift;
        pa.binf = ser.at(0);
    } else if (pa.oinf <= 0 && pa.oinf % 2 == 0) {
        int v = -pa.oinf / 2;
        auto [shift, ser] = laurent_at_infinity(r, static_cast<std::size_t>(2 * v + 2));
        auto rc = [&](int e) {  // coefficient of x^e in r (e <= 2v)
            int idx = -e - shift;  // series is in t = 1/x with f = t^shift (...)
            return idx >= 0 ? ser.at(static_cast<std::size_t>(idx)) : Rat(0);
        };
        std::vector<Rat> a(static_cast<std::size_t>(v + 1), Rat(0));  // a[i], i=0..v
        auto sq = rat_sqrt(rc(2 * v));
        if (!sq) {
            pa.inf_sqrt_rational = false;
        } else {
            a[static_cast<std::size_t>(v)] = *sq;
            for (int m = 1; m <= v; ++m) {
                Rat known(0);
                for (int i = 0; i <= v; ++i)
                    for (int j = 0; j <= v; ++j)
                        if (i + j == 2 * v - m && i != v && j != v)
                            known += a[static_cast<std::size_t>(i)] * a[static_cast<std::size_t>(j)];
                a[static_cast<std::size_t>(v - m)] =
                    (rc(2 * v - m) - known) / (2 * a[static_cast<std::size_t>(v)]);
            }
            Rat theta2(0);
            for (int i = 0; i <= v; ++i)
                for (int j = 0; j <= v; ++j)
                    if (i + j == v - 1)
                        theta2 += a[static_cast<std::size_t>(i)] * a[static_cast<std::size_t>(j)];
            pa.inf_bres = rc(v - 1) - theta2;
            pa.inf_a_lead = a[static_cast<std::size_t>(v)];
            pa.inf_poly = a;
        }
    }
    return pa;
}

/// Solves sum_j p_j E_j = 0 for a monic polynomial P = x^d + ..., where E_j
/// is the (rational-function) image of x^j under the relevant linear
/// operator. Exact Gaussian elimination over Q.
inline std::optional<Poly> solve_monic_poly(const std::vector<RatFun>& E) {
    std::size_t d = E.size() - 1;
    Poly den(Rat(1));
    for (const auto& e : E)
        if (!e.is_zero()) den = poly_lcm(den, e.den());
    std::vector<Poly> N(E.size());
    int maxdeg = 0;
    for (std::size_t j = 0; j < E.size(); ++j) {
        if (E[j].is_zero()) continue;
        N[j] = E[j].num() * (den / E[j].den());
        maxdeg = std::max(maxdeg, N[j].degree());
    }
    // rows: x-coefficients; columns: p_0..p_{d-1}; rhs: -N_d
    std::size_t rows = static_cast<std::size_t>(maxdeg + 1);
    std::vector<std::vector<Rat>> A(rows, std::vector<Rat>(d + 1, Rat(0)));
    for (std::size_t j = 0; j < d; ++j)
        for (int i = 0; i <= N[j].degree(); ++i) A[static_cast<std::size_t>(i)][j] = N[j].coeff(i);
    for (int i = 0; i <= N[d].degree(); ++i) A[static_cast<std::size_t>(i)][d] = -N[d].coeff(i);
    std::size_t rank = 0;
    std::vector<long> pivot_col(rows, -1);
    for (std::size_t c = 0; c < d && rank < rows; ++c) {
        std::size_t p = rank;
        while (p < rows && A[p][c] == 0) ++p;
        if (p == rows) continue;
        std::swap(A[rank], A[p]);
        for (std::size_t rr = 0; rr < rows; ++rr) {
            if (rr == rank || A[rr][c] == 0) continue;
            Rat f = A[rr][c] / A[rank][c];
            for (std::size_t t = c; t <= d; ++t) A[rr][t] -= f * A[rank][t];
        }
        pivot_col[rank] = static_cast<long>(c);
        ++rank;
    }
    // consistency: residual rows must have zero rhs
    for (std::size_t rr = rank; rr < rows; ++rr)
        if (A[rr][d] != 0) return std::nullopt;
    std::vector<Rat> p(d + 1, Rat(0));
    p[d] = 1;
    for (std::size_t rr = 0; rr < rank; ++rr)
        p[static_cast<std::size_t>(pivot_col[rr])] = A[rr][d] / A[rr][pivot_col[rr]];
    return Poly(std::move(p));
}

inline RatFun pole_term(const Rat& c, int power) {
    // 1/(x-c)^power
    Poly den(Rat(1));
    Poly lin(std::vector<Rat>{-c, Rat(1)});
    for (int i = 0; i < power; ++i) den *= lin;
    return RatFun(Poly(Rat(1)), den);
}

}  // namespace detail

/// Case 1: omega in Q(x) with omega' + omega^2 = r. Absence is a definite
/// answer; candidate data outside Q raises UnsupportedPoleField.
inline std::optional<RatFun> kovacic_case1(const RatFun& r) {
    if (r.is_zero()) return RatFun(0);
    auto pa = detail::analyze_poles(r);
    // necessary conditions: poles of order 1 or even; infinity even or > 2
    for (const auto& p : pa.poles)
        if (p.order != 1 && p.order % 2) return std::nullopt;
    for (int m : pa.irrational_orders)
        if (m != 1 && m % 2) return std::nullopt;
    if (pa.oinf <= 2 && pa.oinf % 2) return std::nullopt;
    if (!pa.irrational_orders.empty())
        throw UnsupportedPoleField("case 1: irrational pole locations");
    if (pa.oinf <= 0 && !pa.inf_sqrt_rational)
        throw UnsupportedPoleField("case 1: irrational square root at infinity");

    std::size_t n = pa.poles.size();
    // per-pole alpha pairs (alpha^+, alpha^-)
    std::vector<std::pair<Rat, Rat>> alpha(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = pa.poles[i];
        if (p.order == 1) {
            alpha[i] = {Rat(1), Rat(1)};
        } else if (p.order == 2) {
            auto s = rat_sqrt(1 + 4 * p.b);
            if (!s)
                throw UnsupportedPoleField("case 1: irrational exponent at x = " +
                                           rat_to_string(p.c));
            alpha[i] = {(1 + *s) / 2, (1 - *s) / 2};
        } else {
            alpha[i] = {(p.bres / p.a_lead + Rat(p.order / 2)) / 2,
                        (-p.bres / p.a_lead + Rat(p.order / 2)) / 2};
        }
    }
    std::pair<Rat, Rat> ainf;
    if (pa.oinf > 2) {
        ainf = {Rat(0), Rat(1)};
    } else if (pa.oinf == 2) {
        auto s = rat_sqrt(1 + 4 * pa.binf);
        if (!s) throw UnsupportedPoleField("case 1: irrational exponent at infinity");
        ainf = {(1 + *s) / 2, (1 - *s) / 2};
    } else {
        int v = -pa.oinf / 2;
        ainf = {(pa.inf_bres / pa.inf_a_lead - Rat(v)) / 2,
                (-pa.inf_bres / pa.inf_a_lead - Rat(v)) / 2};
    }

    // enumerate sign families, smallest degree first for determinism
    struct Cand {
        long d;
        unsigned long mask;  // bit i: pole i sign (0:+ 1:-); top bit: infinity
    };
    std::vector<Cand> cands;
    for (unsigned long mask = 0; mask < (1ul << (n + 1)); ++mask) {
        Rat dv = (mask >> n) & 1 ? ainf.second : ainf.first;
        for (std::size_t i = 0; i < n; ++i)
            dv -= (mask >> i) & 1 ? alpha[i].second : alpha[i].first;
        if (!is_integer(dv) || dv < 0) continue;
        cands.push_back({to_long(dv), mask});
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        return a.d != b.d ? a.d < b.d : a.mask < b.mask;
    });

    for (const auto& cand : cands) {
        RatFun theta(0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& p = pa.poles[i];
            bool minus = (cand.mask >> i) & 1;
            theta += RatFun(minus ? alpha[i].second : alpha[i].first) * detail::pole_term(p.c, 1);
            for (std::size_t j = 0; j < p.sqrt_part.size(); ++j) {
                Rat a = p.sqrt_part[j];
                if (minus) a = -a;
                theta += RatFun(a) * detail::pole_term(p.c, static_cast<int>(j) + 2);
            }
        }
        if (pa.oinf <= 0) {
            Poly th;
            for (std::size_t i = 0; i < pa.inf_poly.size(); ++i)
                th += Poly::monomial(pa.inf_poly[i], i);
            if ((cand.mask >> n) & 1) th = -th;
            theta += RatFun(th);
        }
        RatFun phi = theta.derivative() + theta * theta - r;
        std::vector<RatFun> E(static_cast<std::size_t>(cand.d) + 1);
        for (long j = 0; j <= cand.d; ++j) {
            RatFun e = phi * RatFun(Poly::monomial(Rat(1), static_cast<std::size_t>(j)));
            if (j >= 1)
                e += RatFun(2 * j) * theta *
                     RatFun(Poly::monomial(Rat(1), static_cast<std::size_t>(j - 1)));
            if (j >= 2)
                e += RatFun(Poly::monomial(Rat(j * (j - 1)), static_cast<std::size_t>(j - 2)));
            E[static_cast<std::size_t>(j)] = e;
        }
        auto P = detail::solve_monic_poly(E);
        if (!P) continue;
        RatFun w = theta + RatFun(P->derivative()) / RatFun(*P);
        if (w.derivative() + w * w - r == RatFun(0)) return w;
    }
    return std::nullopt;
}

/// Case 2: monic quadratic w^2 + a w + b = 0 over Q(x) whose roots satisfy
/// the Riccati equation for r.
inline std::optional<std::pair<RatFun, RatFun>> kovacic_case2(const RatFun& r) {
    if (r.is_zero()) return std::nullopt;
    auto pa = detail::analyze_poles(r);
    // necessary: a pole of order 2, or of odd order > 2
    bool ok = false;
    for (const auto& p : pa.poles) ok = ok || p.order == 2 || (p.order > 2 && p.order % 2);
    for (int m : pa.irrational_orders) ok = ok || m == 2 || (m > 2 && m % 2);
    if (!ok) return std::nullopt;
    if (!pa.irrational_orders.empty())
        throw UnsupportedPoleField("case 2: irrational pole locations");

    std::size_t n = pa.poles.size();
    std::vector<std::vector<long>> E(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = pa.poles[i];
        if (p.order == 1) {
            E[i] = {4};
        } else if (p.order == 2) {
            E[i] = {2};
            if (auto s = rat_sqrt(1 + 4 * p.b)) {
                for (long k : {-2l, 2l}) {
                    Rat e = 2 + k * *s;
                    if (is_integer(e)) E[i].push_back(to_long(e));
                }
            }
        } else {
            E[i] = {p.order};
        }
        std::sort(E[i].begin(), E[i].end());
        E[i].erase(std::unique(E[i].begin(), E[i].end()), E[i].end());
    }
    std::vector<long> Einf;
    if (pa.oinf > 2) {
        Einf = {0, 2, 4};
    } else if (pa.oinf == 2) {
        Einf = {2};
        if (auto s = rat_sqrt(1 + 4 * pa.binf)) {
            for (long k : {-2l, 2l}) {
                Rat e = 2 + k * *s;
                if (is_integer(e)) Einf.push_back(to_long(e));
            }
        }
        std::sort(Einf.begin(), Einf.end());
        Einf.erase(std::unique(Einf.begin(), Einf.end()), Einf.end());
    } else {
        Einf = {pa.oinf};
    }

    struct Fam {
        long d;
        std::vector<long> e;  // per-pole, then infinity
    };
    std::vector<Fam> fams;
    std::vector<std::size_t> idx(n + 1, 0);
    while (true) {
        long sum = 0;
        std::vector<long> e;
        for (std::size_t i = 0; i < n; ++i) {
            e.push_back(E[i][idx[i]]);
            sum += e.back();
        }
        e.push_back(Einf[idx[n]]);
        long num = e.back() - sum;
        if (num % 2 == 0 && num >= 0) fams.push_back({num / 2, e});
        // odometer increment
        std::size_t pos = 0;
        for (; pos <= n; ++pos) {
            std::size_t limit = pos < n ? E[pos].size() : Einf.size();
            if (++idx[pos] < limit) break;
            idx[pos] = 0;
        }
        if (pos > n) break;
    }
    std::sort(fams.begin(), fams.end(),
              [](const Fam& a, const Fam& b) { return a.d != b.d ? a.d < b.d : a.e < b.e; });

    for (const auto& fam : fams) {
        RatFun theta(0);
        for (std::size_t i = 0; i < n; ++i)
            theta += RatFun(make_rat(fam.e[i], 2)) * detail::pole_term(pa.poles[i].c, 1);
        RatFun T2 = RatFun(3) * theta;
        RatFun T1 = RatFun(3) * theta * theta + RatFun(3) * theta.derivative() - RatFun(4) * r;
        RatFun T0 = theta.derivative().derivative() + RatFun(3) * theta * theta.derivative() +
                    theta * theta * theta - RatFun(4) * r * theta - RatFun(2) * r.derivative();
        std::vector<RatFun> Eops(static_cast<std::size_t>(fam.d) + 1);
        for (long j = 0; j <= fam.d; ++j) {
            auto mono = [&](long k) {
                return RatFun(Poly::monomial(Rat(1), static_cast<std::size_t>(k)));
            };
            RatFun e = T0 * mono(j);
            if (j >= 1) e += T1 * RatFun(j) * mono(j - 1);
            if (j >= 2) e += T2 * RatFun(j * (j - 1)) * mono(j - 2);
            if (j >= 3) e += RatFun(j * (j - 1) * (j - 2)) * mono(j - 3);
            Eops[static_cast<std::size_t>(j)] = e;
        }
        auto P = detail::solve_monic_poly(Eops);
        if (!P) continue;
        RatFun phi = theta + RatFun(P->derivative()) / RatFun(*P);
        RatFun a = -phi;
        RatFun b = phi.derivative() / RatFun(2) + phi * phi / RatFun(2) - r;
        // Riccati modulo w^2 + a w + b: both reduced components must vanish
        RatFun c1 = a * a - a.derivative() - RatFun(2) * b - RatFun(2) * r;
        RatFun c0 = a * b - b.derivative() - a * r;
        if (c1 == RatFun(0) && c0 == RatFun(0)) return std::make_pair(a, b);
    }
    return std::nullopt;
}

/// Necessary conditions for case 3 (all solutions algebraic): pole orders
/// <= 2, order >= 2 at infinity, rational local exponent differences.
inline bool kovacic_case3_possible(const RatFun& r) {
    if (r.is_zero()) return false;
    auto pa = detail::analyze_poles(r);
    for (const auto& p : pa.poles)
        if (p.order > 2) return false;
    for (int m : pa.irrational_orders)
        if (m > 2) return false;
    if (pa.oinf < 2) return false;
    for (const auto& p : pa.poles)
        if (p.order == 2 && !rat_sqrt(1 + 4 * p.b)) return false;
    if (pa.oinf == 2 && !rat_sqrt(1 + 4 * pa.binf)) return false;
    return true;
}

/// Structural lower bound for the local exponent of e at x -> 0+, used to
/// decide whether an integral may be taken from 0. nullopt: unknown.
inline std::optional<Rat> local_exponent_at_zero(const ExprPtr& e) {
    switch (e->kind) {
        case ExprKind::Const:
        case ExprKind::Pi:
        case ExprKind::Log2:
        case ExprKind::SqrtInt:
        case ExprKind::Log:
            return Rat(0);
        case ExprKind::Var:
            return Rat(1);
        case ExprKind::Add: {
            std::optional<Rat> m;
            for (const auto& k : e->kids) {
                auto v = local_exponent_at_zero(k);
                if (!v) return std::nullopt;
                if (!m || *v < *m) m = v;
            }
            return m;
        }
        case ExprKind::Mul: {
            Rat s(0);
            for (const auto& k : e->kids) {
                auto v = local_exponent_at_zero(k);
                if (!v) return std::nullopt;
                s += *v;
            }
            return s;
        }
        case ExprKind::Pow: {
            auto v = local_exponent_at_zero(e->kids[0]);
            if (!v) return std::nullopt;
            return *v * e->value;
        }
        case ExprKind::ExpIntRat: {
            const RatFun& f = e->rf;
            if (f.is_zero()) return Rat(0);
            int val = f.valuation_at(Rat(0));
            if (val >= 0) return Rat(0);
            if (val == -1) {
                auto [shift, ser] = laurent_at(f, Rat(0), 1);
                (void)shift;
                return ser.at(0);  // e^{int c/x + ...} ~ x^c
            }
            return std::nullopt;
        }
        case ExprKind::IntegralFrom: {
            auto v = local_exponent_at_zero(e->kids[0]);
            if (!v || *v <= -1) return std::nullopt;
            // int_0^x t^v ~ x^{v+1}; from another base point a constant
            // offset caps the bound at 0
            Rat shifted = *v + 1;
            if (e->value == 0) return shifted;
            return shifted < 0 ? shifted : Rat(0);
        }
    }
    return std::nullopt;
}

/// Reduction of order: f2 = f1 int e^{-int p1/p2} / f1^2, taken from 0 when
/// the integrand is integrable there, else from 1/2.
inline ExprPtr second_solution(const DiffOp& L2, const ExprPtr& f1) {
    if (L2.order() != 2) throw std::domain_error("second_solution: order-2 operator required");
    RatFun mu = -RatFun(L2.coeff(1)) / RatFun(L2.coeff(2));
    ExprPtr wexp = exp_integral_expr(mu);
    ExprPtr integrand = normalize(ex_mul({wexp, ex_pow(f1, Rat(-2))}));
    Rat base = make_rat(1, 2);
    auto expnt = local_exponent_at_zero(integrand);
    if (expnt && *expnt > -1) base = 0;
    return normalize(ex_mul({f1, ex_integral(base, "t", integrand)}));
}

/// Riccati residual of the quadratic w^2 + a w + b = 0 against
/// p2 (w' + w^2) + p1 w + p0 = 0, reduced modulo the quadratic: returns the
/// linear-in-w components (c1, c0); both vanish iff the certificate holds.
inline std::pair<RatFun, RatFun> riccati_quadratic_residual(const DiffOp& L2, const RatFun& a,
                                                            const RatFun& b) {
    RatFun A = RatFun(L2.coeff(1)) / RatFun(L2.coeff(2));
    RatFun B = RatFun(L2.coeff(0)) / RatFun(L2.coeff(2));
    RatFun c1 = a * a - a.derivative() - RatFun(2) * b + RatFun(2) * B - A * a;
    RatFun c0 = a * b - b.derivative() + B * a - RatFun(2) * A * b;
    return {c1, c0};
}

/// Full dispatch: case 1, case 2, case-3 detection. omega (or the
/// quadratic) is reported in the Riccati field of the original operator:
/// p2 (w' + w^2) + p1 w + p0 = 0.
inline KovacicResult kovacic(const DiffOp& L2) {
    NormalForm nf = to_normal_form(L2);
    KovacicResult res;
    bool undecided = false;
    try {
        if (auto w = kovacic_case1(nf.r)) {
            res.case_tag = KovacicCase::RationalOmega;
            RatFun worig = *w - nf.v;
            RatFun resid = RatFun(L2.coeff(2)) * (worig.derivative() + worig * worig) +
                           RatFun(L2.coeff(1)) * worig + RatFun(L2.coeff(0));
            if (!(resid == RatFun(0)))
                throw std::logic_error("kovacic: case-1 certificate failed");
            res.omega = worig;
            res.certificate =
                "p2 (w' + w^2) + p1 w + p0 = 0 with w = " + ratfun_to_string(worig);
            ExprPtr f1 = normalize(exp_integral_expr(worig));
            res.solutions = {f1, second_solution(L2, f1)};
            return res;
        }
    } catch (const UnsupportedPoleField& ex) {
        undecided = true;
        res.diagnostic = ex.what();
    }
    try {
        if (auto q = kovacic_case2(nf.r)) {
            res.case_tag = KovacicCase::QuadraticOmega;
            // move the quadratic into the original Riccati field: w -> w + v
            RatFun a = q->first + RatFun(2) * nf.v;
            RatFun b = nf.v * nf.v + q->first * nf.v + q->second;
            auto [c1, c0] = riccati_quadratic_residual(L2, a, b);
            if (!(c1 == RatFun(0)) || !(c0 == RatFun(0)))
                throw std::logic_error("kovacic: case-2 certificate failed");
            res.quad = std::make_pair(a, b);
            res.certificate = "w^2 + a w + b = 0 reduces p2 (w' + w^2) + p1 w + p0 to 0, a = " +
                              ratfun_to_string(a) + ", b = " + ratfun_to_string(b);
            RatFun delta = a * a - RatFun(4) * b;
            RatFun mu = -a / RatFun(2);
            try {
                ExprPtr common = exp_integral_expr(mu);
                ExprPtr fplus = normalize(
                    ex_mul({common, rationalize_quadratic_radical(delta, make_rat(1, 2))}));
                ExprPtr fminus = normalize(
                    ex_mul({common, rationalize_quadratic_radical(delta, make_rat(-1, 2))}));
                res.solutions = {fplus, fminus};
            } catch (const RadicandTooComplex& ex) {
                res.diagnostic = ex.what();
            }
            return res;
        }
    } catch (const UnsupportedPoleField& ex) {
        undecided = true;
        res.diagnostic = ex.what();
    }
    if (kovacic_case3_possible(nf.r)) {
        res.case_tag = KovacicCase::UnsupportedCase3;
        if (res.diagnostic.empty()) res.diagnostic = "case-3 necessary conditions hold";
    } else if (undecided) {
        res.case_tag = KovacicCase::UnsupportedCase3;
    } else {
        res.case_tag = KovacicCase::NoLiouvillian;
    }
    return res;
}

}  // namespace invmellin
