#pragma once

#include <boost/multiprecision/mpfr.hpp>
#include <stdexcept>
#include <string>

namespace invmellin {

/// Arbitrary-precision real; precision is the thread-global mpfr default.
using Real = boost::multiprecision::mpfr_float;

/// Scoped working precision in decimal digits.
class PrecisionGuard {
  public:
    explicit PrecisionGuard(unsigned decimal_digits)
        : saved_(Real::default_precision()) {
        Real::default_precision(decimal_digits);
    }
    ~PrecisionGuard() { Real::default_precision(saved_); }
    PrecisionGuard(const PrecisionGuard&) = delete;
    PrecisionGuard& operator=(const PrecisionGuard&) = delete;

  private:
    unsigned saved_;
};

inline Real pi_real() {
    return 4 * atan(Real(1));
}

/// Complex value over Real, just enough for evaluating integrands written
/// with sqrt(x-1) = i sqrt(1-x) on (0,1). Principal branches throughout.
struct Cplx {
    Real re, im;

    Cplx() : re(0), im(0) {}
    Cplx(const Real& r) : re(r), im(0) {}
    Cplx(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}
    Cplx(long n) : re(n), im(0) {}
    Cplx(int n) : re(n), im(0) {}
    explicit Cplx(const std::string& s) : re(s), im(0) {}

    friend Cplx operator+(const Cplx& a, const Cplx& b) { return {a.re + b.re, a.im + b.im}; }
    friend Cplx operator-(const Cplx& a, const Cplx& b) { return {a.re - b.re, a.im - b.im}; }
    Cplx operator-() const { return {-re, -im}; }
    friend Cplx operator*(const Cplx& a, const Cplx& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend Cplx operator/(const Cplx& a, const Cplx& b) {
        Real d = b.re * b.re + b.im * b.im;
        if (d == 0) throw std::domain_error("Cplx: division by zero");
        return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
    }
    Cplx& operator+=(const Cplx& b) { return *this = *this + b; }
    Cplx& operator-=(const Cplx& b) { return *this = *this - b; }
    Cplx& operator*=(const Cplx& b) { return *this = *this * b; }
    Cplx& operator/=(const Cplx& b) { return *this = *this / b; }
};

inline Real abs(const Cplx& z) {
    using std::sqrt;
    return sqrt(z.re * z.re + z.im * z.im);
}
inline Real arg(const Cplx& z) {
    return atan2(z.im, z.re);
}
inline Cplx sqrt(const Cplx& z) {
    using std::sqrt;
    if (z.im == 0) {
        if (z.re >= 0) return Cplx(sqrt(z.re));
        return {Real(0), sqrt(-z.re)};
    }
    Real r = abs(z), t = arg(z) / 2;
    Real m = sqrt(r);
    return {m * cos(t), m * sin(t)};
}
inline Cplx log(const Cplx& z) {
    using std::log;
    return {log(abs(z)), arg(z)};
}
inline Cplx exp(const Cplx& z) {
    using std::exp;
    Real m = exp(z.re);
    return {m * cos(z.im), m * sin(z.im)};
}
/// Principal-branch power with real exponent.
inline Cplx pow(const Cplx& z, const Real& p) {
    using std::pow;
    if (z.im == 0 && z.re > 0) return Cplx(pow(z.re, p));
    if (z.re == 0 && z.im == 0) return Cplx(Real(0));
    Real r = abs(z), t = arg(z) * p;
    Real m = pow(r, p);
    return {m * cos(t), m * sin(t)};
}
inline Cplx pow(const Cplx& z, const Cplx& p) {
    if (p.im != 0) throw std::domain_error("Cplx: complex exponent unsupported");
    return pow(z, p.re);
}
/// Pi constant hook for the generic evaluator.
inline Cplx atan(const Cplx& z) {
    using std::atan;
    if (z.im != 0) throw std::domain_error("Cplx: atan off the real line");
    return Cplx(atan(z.re));
}

}  // namespace invmellin
