#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "invmellin/poly.hpp"

namespace invmellin {

/// Reduced rational function over Q: gcd(num, den) = 1, den monic.
class RatFun {
  public:
    RatFun() : num_(), den_(Rat(1)) {}
    RatFun(const Rat& c) : num_(c), den_(Rat(1)) {}
    RatFun(long c) : RatFun(Rat(c)) {}
    RatFun(Poly num, Poly den) {
        if (den.is_zero()) throw std::domain_error("RatFun: zero denominator");
        if (num.is_zero()) {
            num_ = Poly();
            den_ = Poly(Rat(1));
            return;
        }
        Poly g = poly_gcd(num, den);
        num = num / g;
        den = den / g;
        Rat lc = den.leading();
        num_ = num / lc;
        den_ = den / lc;
    }
    RatFun(const Poly& num) : num_(num), den_(Rat(1)) {}

    static RatFun variable() { return RatFun(Poly::variable()); }

    const Poly& num() const { return num_; }
    const Poly& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }
    bool is_poly() const { return den_.degree() == 0; }
    bool is_constant() const { return num_.degree() <= 0 && is_poly(); }
    Rat constant_value() const {
        if (!is_constant()) throw std::domain_error("RatFun: not constant");
        return num_.coeff(0);
    }

    friend RatFun operator+(const RatFun& a, const RatFun& b) {
        return RatFun(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }
    friend RatFun operator-(const RatFun& a, const RatFun& b) {
        return RatFun(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
    }
    RatFun operator-() const {
        RatFun r = *this;
        r.num_ = -r.num_;
        return r;
    }
    friend RatFun operator*(const RatFun& a, const RatFun& b) {
        return RatFun(a.num_ * b.num_, a.den_ * b.den_);
    }
    friend RatFun operator/(const RatFun& a, const RatFun& b) {
        if (b.is_zero()) throw std::domain_error("RatFun division by zero");
        return RatFun(a.num_ * b.den_, a.den_ * b.num_);
    }
    RatFun& operator+=(const RatFun& b) { return *this = *this + b; }
    RatFun& operator-=(const RatFun& b) { return *this = *this - b; }
    RatFun& operator*=(const RatFun& b) { return *this = *this * b; }
    RatFun& operator/=(const RatFun& b) { return *this = *this / b; }
    friend bool operator==(const RatFun& a, const RatFun& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }

    RatFun derivative() const {
        return RatFun(num_.derivative() * den_ - num_ * den_.derivative(), den_ * den_);
    }

    template <class T>
    T eval(const T& x) const {
        return num_.eval<T>(x) / den_.eval<T>(x);
    }
    Rat eval_rat(const Rat& x) const {
        Rat d = den_.eval_rat(x);
        if (d == 0) throw std::domain_error("RatFun: pole hit");
        return num_.eval_rat(x) / d;
    }

    /// Valuation at a finite rational point: negative at a pole, positive at
    /// a zero. Throws on the zero function.
    int valuation_at(const Rat& c) const {
        if (is_zero()) throw std::domain_error("valuation of zero");
        return num_.shift(c).valuation() - den_.shift(c).valuation();
    }
    /// Valuation at infinity: deg den - deg num (positive when vanishing).
    int valuation_at_infinity() const {
        if (is_zero()) throw std::domain_error("valuation of zero");
        return den_.degree() - num_.degree();
    }

  private:
    Poly num_, den_;
};

inline RatFun pow_ratfun(const RatFun& a, long e) {
    if (e < 0) return pow_ratfun(RatFun(1) / a, -e);
    RatFun r(1), b = a;
    unsigned long n = static_cast<unsigned long>(e);
    while (n) {
        if (n & 1) r *= b;
        b *= b;
        n >>= 1;
    }
    return r;
}

/// Truncated power series over Q: sum c[i] t^i + O(t^len).
struct Series {
    std::vector<Rat> c;
    Rat at(std::size_t i) const { return i < c.size() ? c[i] : Rat(0); }
};

inline Series series_mul(const Series& a, const Series& b, std::size_t len) {
    Series r;
    r.c.assign(len, Rat(0));
    for (std::size_t i = 0; i < a.c.size() && i < len; ++i)
        for (std::size_t j = 0; j < b.c.size() && i + j < len; ++j) r.c[i + j] += a.c[i] * b.c[j];
    return r;
}

/// Multiplicative inverse of a series with nonzero constant term.
inline Series series_inv(const Series& a, std::size_t len) {
    if (a.c.empty() || a.c[0] == 0) throw std::domain_error("series_inv: zero constant term");
    Series r;
    r.c.assign(len, Rat(0));
    r.c[0] = 1 / a.c[0];
    for (std::size_t n = 1; n < len; ++n) {
        Rat s(0);
        for (std::size_t k = 1; k <= n; ++k) s += a.at(k) * r.c[n - k];
        r.c[n] = -s / a.c[0];
    }
    return r;
}

/// Laurent expansion of f at the finite point c:
///   f = t^shift * (series in t), t = x - c, series constant term nonzero.
/// Returns (shift, series of length len).
inline std::pair<int, Series> laurent_at(const RatFun& f, const Rat& c, std::size_t len) {
    if (f.is_zero()) throw std::domain_error("laurent_at: zero function");
    Poly n = f.num().shift(c), d = f.den().shift(c);
    int vn = n.valuation(), vd = d.valuation();
    Series sn, sd;
    sn.c.assign(n.coeffs().begin() + vn, n.coeffs().end());
    sd.c.assign(d.coeffs().begin() + vd, d.coeffs().end());
    Series r = series_mul(sn, series_inv(sd, len), len);
    return {vn - vd, r};
}

/// Expansion of f at infinity in t = 1/x:
///   f = t^shift * (series in t), constant term nonzero; shift equals the
/// valuation at infinity.
inline std::pair<int, Series> laurent_at_infinity(const RatFun& f, std::size_t len) {
    if (f.is_zero()) throw std::domain_error("laurent_at_infinity: zero function");
    Poly n = f.num().reversed(), d = f.den().reversed();
    Series sn, sd;
    sn.c = n.coeffs();
    sd.c = d.coeffs();
    Series r = series_mul(sn, series_inv(sd, len), len);
    return {f.den().degree() - f.num().degree(), r};
}

inline std::string ratfun_to_string(const RatFun& f, const std::string& var = "x") {
    if (f.is_poly()) return poly_to_string(f.num(), var);
    return "(" + poly_to_string(f.num(), var) + ")/(" + poly_to_string(f.den(), var) + ")";
}

}  // namespace invmellin
