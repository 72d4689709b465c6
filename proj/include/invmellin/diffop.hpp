#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "invmellin/ratfun.hpp"

namespace invmellin {

struct IrregularSingularPoint : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {
inline std::vector<Int> binomial_row(std::size_t n) {
    std::vector<Int> row(n + 1, Int(1));
    for (std::size_t k = 1; k < n; ++k) row[k] = row[k - 1] * Int(static_cast<long>(n - k + 1)) / Int(static_cast<long>(k));
    return row;
}
}  // namespace detail

/// Linear differential operator with rational-function coefficients:
/// sum c[j] D^j, D = d/dx. Used for exact quotient/remainder arithmetic.
class RatOp {
  public:
    RatOp() = default;
    explicit RatOp(std::vector<RatFun> coeffs) : c_(std::move(coeffs)) { trim(); }
    static RatOp zero() { return RatOp(); }
    static RatOp identity() { return RatOp({RatFun(1)}); }
    static RatOp derivation() { return RatOp({RatFun(0), RatFun(1)}); }

    bool is_zero() const { return c_.empty(); }
    int order() const { return static_cast<int>(c_.size()) - 1; }
    const std::vector<RatFun>& coeffs() const { return c_; }
    RatFun coeff(std::size_t j) const { return j < c_.size() ? c_[j] : RatFun(0); }
    const RatFun& leading() const {
        if (c_.empty()) throw std::domain_error("leading of zero operator");
        return c_.back();
    }

    friend RatOp operator+(const RatOp& a, const RatOp& b) {
        std::vector<RatFun> c(std::max(a.c_.size(), b.c_.size()), RatFun(0));
        for (std::size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
        for (std::size_t i = 0; i < b.c_.size(); ++i) c[i] += b.c_[i];
        return RatOp(std::move(c));
    }
    friend RatOp operator-(const RatOp& a, const RatOp& b) { return a + (RatFun(-1) * b); }
    friend RatOp operator*(const RatFun& s, const RatOp& a) {
        std::vector<RatFun> c(a.c_);
        for (auto& x : c) x = s * x;
        return RatOp(std::move(c));
    }

    /// Operator composition: (a * b)(f) = a(b(f)).
    /// Uses D^i (g h) Leibniz expansion: D^i . g = sum_k C(i,k) g^(k) D^(i-k).
    friend RatOp operator*(const RatOp& a, const RatOp& b) {
        if (a.is_zero() || b.is_zero()) return RatOp();
        std::vector<RatFun> c(a.c_.size() + b.c_.size() - 1, RatFun(0));
        for (std::size_t i = 0; i < a.c_.size(); ++i) {
            if (a.c_[i].is_zero()) continue;
            auto binom = detail::binomial_row(i);
            for (std::size_t j = 0; j < b.c_.size(); ++j) {
                if (b.c_[j].is_zero()) continue;
                RatFun g = b.c_[j];
                for (std::size_t k = 0; k <= i; ++k) {
                    if (k > 0) g = g.derivative();
                    c[i - k + j] += a.c_[i] * RatFun(Rat(binom[k])) * g;
                }
            }
        }
        return RatOp(std::move(c));
    }

    friend bool operator==(const RatOp& a, const RatOp& b) { return a.c_ == b.c_; }

    /// Action on a rational function.
    RatFun apply(const RatFun& f) const {
        RatFun r(0), g = f;
        for (std::size_t j = 0; j < c_.size(); ++j) {
            if (j > 0) g = g.derivative();
            r += c_[j] * g;
        }
        return r;
    }

  private:
    void trim() {
        while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
    }
    std::vector<RatFun> c_;
};

/// Right division: a = q * b + r with ord r < ord b, exact over Q(x).
inline std::pair<RatOp, RatOp> op_right_divmod(const RatOp& a, const RatOp& b) {
    if (b.is_zero()) throw std::domain_error("op_right_divmod: division by zero operator");
    RatOp r = a, q = RatOp::zero();
    while (!r.is_zero() && r.order() >= b.order()) {
        int k = r.order() - b.order();
        // lead of (f D^k) * b is f * lc(b); no derivative terms reach the top order
        RatFun f = r.leading() / b.leading();
        std::vector<RatFun> mono(k + 1, RatFun(0));
        mono[k] = f;
        RatOp m(std::move(mono));
        q = q + m;
        r = r - m * b;
    }
    return {q, r};
}

/// Linear differential operator with polynomial coefficients, normalized:
/// coefficients jointly primitive over Z with positive leading coefficient
/// of the top polynomial.
class DiffOp {
  public:
    DiffOp() = default;
    explicit DiffOp(std::vector<Poly> coeffs) : q_(std::move(coeffs)) { normalize(); }
    explicit DiffOp(const RatOp& op) {
        Poly den(Rat(1));
        for (const auto& c : op.coeffs()) den = poly_lcm(den, c.den());
        for (const auto& c : op.coeffs()) q_.push_back(c.num() * (den / c.den()));
        normalize();
    }

    static DiffOp derivation() { return DiffOp({Poly(), Poly(Rat(1))}); }

    bool is_zero() const { return q_.empty(); }
    int order() const { return static_cast<int>(q_.size()) - 1; }
    const std::vector<Poly>& coeffs() const { return q_; }
    Poly coeff(std::size_t j) const { return j < q_.size() ? q_[j] : Poly(); }
    const Poly& leading() const {
        if (q_.empty()) throw std::domain_error("leading of zero operator");
        return q_.back();
    }

    RatOp to_ratop() const {
        std::vector<RatFun> c;
        for (const auto& p : q_) c.emplace_back(p);
        return RatOp(std::move(c));
    }

    friend bool operator==(const DiffOp& a, const DiffOp& b) { return a.q_ == b.q_; }

    RatFun apply(const RatFun& f) const { return to_ratop().apply(f); }
    Poly apply_poly(const Poly& p) const {
        Poly r, g = p;
        for (std::size_t j = 0; j < q_.size(); ++j) {
            if (j > 0) g = g.derivative();
            r += q_[j] * g;
        }
        return r;
    }

  private:
    void normalize() {
        while (!q_.empty() && q_.back().is_zero()) q_.pop_back();
        if (q_.empty()) return;
        Rat g(0);
        for (const auto& p : q_)
            for (const auto& c : p.coeffs()) g = rat_content_gcd(g, c);
        if (g < 0) g = -g;
        if (q_.back().leading() < 0) g = -g;
        for (auto& p : q_) p = p / g;
    }
    std::vector<Poly> q_;
};

inline DiffOp op_mul(const DiffOp& a, const DiffOp& b) {
    return DiffOp(a.to_ratop() * b.to_ratop());
}
inline DiffOp op_add(const DiffOp& a, const DiffOp& b) {
    return DiffOp(a.to_ratop() + b.to_ratop());
}

/// Formal adjoint: sum (-D)^j . q_j. Left factors of L correspond to right
/// factors of the adjoint.
inline DiffOp op_adjoint(const DiffOp& a) {
    RatOp r = RatOp::zero();
    RatOp minus_d({RatFun(0), RatFun(Rat(-1))});
    for (int j = 0; j <= a.order(); ++j) {
        RatOp term = RatOp::identity();
        for (int k = 0; k < j; ++k) term = minus_d * term;
        r = r + term * RatOp({RatFun(a.coeff(j))});
    }
    return DiffOp(r);
}

inline Poly falling_factorial(std::size_t j) {
    // lambda (lambda-1) ... (lambda-j+1) as a polynomial in lambda
    Poly p(Rat(1));
    for (std::size_t i = 0; i < j; ++i)
        p *= Poly(std::vector<Rat>{Rat(-static_cast<long>(i)), Rat(1)});
    return p;
}

/// Indicial polynomial at a finite point c. Roots are the local exponents.
/// When `require_regular`, throws IrregularSingularPoint if the point is a
/// singular point failing Fuchs's criterion.
inline Poly indicial_polynomial(const DiffOp& a, const Rat& c, bool require_regular = true) {
    if (a.is_zero()) throw std::domain_error("indicial of zero operator");
    int d = a.order();
    int m = 0;
    bool have = false;
    std::vector<int> ord(d + 1, 0);
    for (int j = 0; j <= d; ++j) {
        if (a.coeff(j).is_zero()) { ord[j] = -1; continue; }
        ord[j] = a.coeff(j).shift(c).valuation();
        int v = ord[j] - j;
        if (!have || v < m) { m = v; have = true; }
    }
    Poly ind;
    for (int j = 0; j <= d; ++j) {
        if (ord[j] < 0) continue;
        if (ord[j] - j == m) ind += a.coeff(j).shift(c).coeff(ord[j]) * falling_factorial(j);
    }
    if (require_regular && ind.degree() != d)
        throw IrregularSingularPoint("irregular singular point at x = " + rat_to_string(c));
    return ind;
}

/// Indicial polynomial at infinity; roots lambda describe behavior x^lambda
/// as x -> infinity.
inline Poly indicial_polynomial_at_infinity(const DiffOp& a, bool require_regular = true) {
    if (a.is_zero()) throw std::domain_error("indicial of zero operator");
    int d = a.order();
    int m = 0;
    bool have = false;
    for (int j = 0; j <= d; ++j) {
        if (a.coeff(j).is_zero()) continue;
        int v = a.coeff(j).degree() - j;
        if (!have || v > m) { m = v; have = true; }
    }
    Poly ind;
    for (int j = 0; j <= d; ++j) {
        if (a.coeff(j).is_zero()) continue;
        if (a.coeff(j).degree() - j == m) ind += a.coeff(j).leading() * falling_factorial(j);
    }
    if (require_regular && ind.degree() != d)
        throw IrregularSingularPoint("irregular singular point at infinity");
    return ind;
}

inline std::string op_to_string(const DiffOp& a, const std::string& var = "x") {
    if (a.is_zero()) return "0";
    std::string s;
    for (int j = a.order(); j >= 0; --j) {
        if (a.coeff(j).is_zero()) continue;
        if (!s.empty()) s += " + ";
        s += "(" + poly_to_string(a.coeff(j), var) + ")";
        if (j > 0) s += "*D" + (j > 1 ? "^" + std::to_string(j) : "");
    }
    return s;
}

}  // namespace invmellin
