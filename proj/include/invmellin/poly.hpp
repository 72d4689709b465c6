#pragma once

#include <algorithm>
#include <cassert>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "invmellin/rat.hpp"

namespace invmellin {

/// Dense univariate polynomial over Q. Coefficient i is the coefficient of
/// the i-th power; the zero polynomial has an empty coefficient list.
class Poly {
  public:
    Poly() = default;
    Poly(const Rat& c0) { c_.push_back(c0); trim(); }
    Poly(long c0) : Poly(Rat(c0)) {}
    explicit Poly(std::vector<Rat> coeffs) : c_(std::move(coeffs)) { trim(); }

    static Poly monomial(const Rat& coeff, std::size_t deg) {
        std::vector<Rat> c(deg + 1, Rat(0));
        c[deg] = coeff;
        return Poly(std::move(c));
    }
    static Poly variable() { return monomial(Rat(1), 1); }

    bool is_zero() const { return c_.empty(); }
    /// Degree; -1 for the zero polynomial.
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    const std::vector<Rat>& coeffs() const { return c_; }
    Rat coeff(std::size_t i) const { return i < c_.size() ? c_[i] : Rat(0); }
    const Rat& leading() const {
        if (c_.empty()) throw std::domain_error("leading coefficient of zero");
        return c_.back();
    }

    friend Poly operator+(const Poly& a, const Poly& b) {
        std::vector<Rat> c(std::max(a.c_.size(), b.c_.size()), Rat(0));
        for (std::size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
        for (std::size_t i = 0; i < b.c_.size(); ++i) c[i] += b.c_[i];
        return Poly(std::move(c));
    }
    friend Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }
    Poly operator-() const {
        std::vector<Rat> c(c_);
        for (auto& x : c) x = -x;
        return Poly(std::move(c));
    }
    friend Poly operator*(const Poly& a, const Poly& b) {
        if (a.is_zero() || b.is_zero()) return Poly();
        std::vector<Rat> c(a.c_.size() + b.c_.size() - 1, Rat(0));
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
        return Poly(std::move(c));
    }
    friend Poly operator*(const Rat& s, const Poly& a) {
        if (s == 0) return Poly();
        std::vector<Rat> c(a.c_);
        for (auto& x : c) x *= s;
        return Poly(std::move(c));
    }
    friend Poly operator*(const Poly& a, const Rat& s) { return s * a; }
    friend Poly operator/(const Poly& a, const Rat& s) {
        if (s == 0) throw std::domain_error("Poly / 0");
        return (1 / s) * a;
    }
    Poly& operator+=(const Poly& b) { return *this = *this + b; }
    Poly& operator-=(const Poly& b) { return *this = *this - b; }
    Poly& operator*=(const Poly& b) { return *this = *this * b; }

    friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }

    /// Euclidean division: returns (quotient, remainder).
    friend std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b) {
        if (b.is_zero()) throw std::domain_error("Poly division by zero");
        Poly r = a, q;
        std::vector<Rat> qc;
        if (a.degree() >= b.degree()) qc.assign(a.degree() - b.degree() + 1, Rat(0));
        while (!r.is_zero() && r.degree() >= b.degree()) {
            std::size_t k = r.degree() - b.degree();
            Rat f = r.leading() / b.leading();
            qc[k] = f;
            r -= Poly::monomial(f, k) * b;
        }
        return {Poly(std::move(qc)), r};
    }
    friend Poly operator/(const Poly& a, const Poly& b) {
        auto [q, r] = divmod(a, b);
        if (!r.is_zero()) throw std::domain_error("Poly division not exact");
        return q;
    }
    friend Poly operator%(const Poly& a, const Poly& b) { return divmod(a, b).second; }

    Poly derivative() const {
        if (c_.size() <= 1) return Poly();
        std::vector<Rat> c(c_.size() - 1);
        for (std::size_t i = 1; i < c_.size(); ++i) c[i - 1] = Rat(static_cast<long>(i)) * c_[i];
        return Poly(std::move(c));
    }

    template <class T>
    T eval(const T& x) const {
        T r(0);
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * x + rat_cast<T>(*it);
        return r;
    }
    Rat eval_rat(const Rat& x) const {
        Rat r(0);
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * x + *it;
        return r;
    }

    /// Taylor shift: p(x + a).
    Poly shift(const Rat& a) const {
        Poly result;
        // Horner on p(x) with x -> (x + a)
        Poly xa = Poly(std::vector<Rat>{a, Rat(1)});
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) result = result * xa + Poly(*it);
        return result;
    }

    /// p(s * x).
    Poly scale_arg(const Rat& s) const {
        std::vector<Rat> c(c_);
        Rat f(1);
        for (std::size_t i = 0; i < c.size(); ++i) {
            c[i] *= f;
            f *= s;
        }
        return Poly(std::move(c));
    }

    /// Coefficients reversed: x^deg * p(1/x).
    Poly reversed() const {
        std::vector<Rat> c(c_.rbegin(), c_.rend());
        return Poly(std::move(c));
    }

    /// Multiplicity of the root a (0 if p(a) != 0).
    int root_multiplicity(const Rat& a) const {
        Poly p = *this;
        Poly lin(std::vector<Rat>{-a, Rat(1)});
        int m = 0;
        while (!p.is_zero() && p.eval_rat(a) == 0) {
            p = p / lin;
            ++m;
        }
        return m;
    }

    /// Order of vanishing at 0 (number of trailing zero coefficients);
    /// degree+1 convention is avoided: throws on the zero polynomial.
    int valuation() const {
        if (is_zero()) throw std::domain_error("valuation of zero polynomial");
        int v = 0;
        while (c_[v] == 0) ++v;
        return v;
    }

    /// Positive rational content (gcd of coefficients); 0 for the zero poly.
    Rat content() const {
        Rat g(0);
        for (const auto& x : c_) g = rat_content_gcd(g, x);
        if (g < 0) g = -g;
        return g;
    }

    /// Monic associate.
    Poly monic() const {
        if (is_zero()) return *this;
        return *this / leading();
    }

    /// Primitive associate with positive leading coefficient.
    Poly primitive() const {
        if (is_zero()) return *this;
        Rat f = content();
        if (leading() < 0) f = -f;
        return *this / f;
    }

  private:
    void trim() {
        while (!c_.empty() && c_.back() == 0) c_.pop_back();
    }
    std::vector<Rat> c_;
};

inline Poly poly_gcd(Poly a, Poly b) {
    while (!b.is_zero()) {
        Poly r = a % b;
        a = std::move(b);
        b = std::move(r);
    }
    return a.monic();
}

inline Poly poly_lcm(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return Poly();
    return ((a * b) / poly_gcd(a, b)).monic();
}

/// Yun's squarefree decomposition: returns [(g1,1),(g2,2),...] with
/// p = lc * prod gi^i, gi squarefree, pairwise coprime, monic.
inline std::vector<std::pair<Poly, int>> squarefree_decomposition(const Poly& p) {
    std::vector<std::pair<Poly, int>> out;
    if (p.degree() < 1) return out;
    Poly a = p.monic();
    Poly g = poly_gcd(a, a.derivative());
    Poly w = a / g;
    Poly y = a.derivative() / g;
    int i = 1;
    while (w.degree() > 0) {
        Poly z = y - w.derivative();
        Poly f = poly_gcd(w, z);
        if (f.degree() > 0) out.emplace_back(f.monic(), i);
        w = w / f;
        y = z / f;
        ++i;
    }
    return out;
}

inline Poly squarefree_part(const Poly& p) {
    if (p.degree() < 1) return p.monic();
    return (p / poly_gcd(p, p.derivative())).monic();
}

/// All rational roots with multiplicities.
inline std::vector<std::pair<Rat, int>> rational_roots(const Poly& p) {
    std::vector<std::pair<Rat, int>> out;
    if (p.degree() < 1) return out;
    Poly q = p.primitive();
    int v = q.valuation();
    if (v > 0) {
        out.emplace_back(Rat(0), v);
        std::vector<Rat> c(q.coeffs().begin() + v, q.coeffs().end());
        q = Poly(std::move(c));
    }
    if (q.degree() < 1) return out;
    // integer-primitive form
    Int den(1);
    for (const auto& x : q.coeffs()) den = int_lcm(den, denom(x));
    std::vector<Int> ic;
    for (const auto& x : q.coeffs()) ic.push_back(numer(x) * (den / denom(x)));
    Int a0 = ic.front(), ad = ic.back();
    for (const Int& pnum : divisors(a0))
        for (const Int& pden : divisors(ad)) {
            if (int_gcd(pnum, pden) != 1) continue;
            for (int sign : {1, -1}) {
                Rat cand = make_rat(sign * pnum, pden);
                int m = q.root_multiplicity(cand);
                if (m > 0) out.emplace_back(cand, m);
            }
        }
    std::sort(out.begin(), out.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    return out;
}

/// Remove all rational linear factors: returns (roots with multiplicity,
/// rootless cofactor).
inline std::pair<std::vector<std::pair<Rat, int>>, Poly> split_rational_roots(const Poly& p) {
    auto roots = rational_roots(p);
    Poly rest = p;
    for (const auto& [r, m] : roots) {
        Poly lin(std::vector<Rat>{-r, Rat(1)});
        for (int i = 0; i < m; ++i) rest = rest / lin;
    }
    return {roots, rest};
}

inline std::string poly_to_string(const Poly& p, const std::string& var = "x") {
    if (p.is_zero()) return "0";
    std::string s;
    for (int i = p.degree(); i >= 0; --i) {
        Rat c = p.coeff(i);
        if (c == 0) continue;
        if (!s.empty()) s += c > 0 ? " + " : " - ";
        else if (c < 0) s += "-";
        Rat a = c < 0 ? Rat(-c) : c;
        bool unit = (a == 1) && i > 0;
        if (!unit) s += rat_to_string(a);
        if (i > 0) {
            if (!unit) s += "*";
            s += var;
            if (i > 1) s += "^" + std::to_string(i);
        }
    }
    return s;
}

}  // namespace invmellin
