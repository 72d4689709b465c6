#pragma once

#include <gmpxx.h>

#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace invmellin {

using Int = mpz_class;
using Rat = mpq_class;

inline Rat make_rat(const Int& num, const Int& den) {
    if (den == 0) throw std::domain_error("make_rat: zero denominator");
    Rat q(num, den);
    q.canonicalize();
    return q;
}

inline Rat make_rat(long num, long den) { return make_rat(Int(num), Int(den)); }

inline const Int& numer(const Rat& q) { return q.get_num(); }
inline const Int& denom(const Rat& q) { return q.get_den(); }

inline bool is_integer(const Rat& q) { return denom(q) == 1; }

inline long to_long(const Rat& q) {
    if (!is_integer(q)) throw std::domain_error("to_long: not an integer");
    if (!numer(q).fits_slong_p()) throw std::domain_error("to_long: out of range");
    return numer(q).get_si();
}

/// Floor of a rational.
inline Int rat_floor(const Rat& q) {
    Int f;
    mpz_fdiv_q(f.get_mpz_t(), numer(q).get_mpz_t(), denom(q).get_mpz_t());
    return f;
}

inline Rat pow_rat(const Rat& base, long e) {
    if (e == 0) return Rat(1);
    Rat b = base;
    bool inv = e < 0;
    unsigned long n = inv ? static_cast<unsigned long>(-e) : static_cast<unsigned long>(e);
    if (inv) {
        if (b == 0) throw std::domain_error("pow_rat: zero to negative power");
        b = 1 / b;
    }
    Rat r(1);
    while (n) {
        if (n & 1) r *= b;
        b *= b;
        n >>= 1;
    }
    return r;
}

/// Exact rational square root, if it exists.
inline std::optional<Rat> rat_sqrt(const Rat& q) {
    if (q < 0) return std::nullopt;
    Int n = numer(q), d = denom(q);
    if (mpz_perfect_square_p(n.get_mpz_t()) && mpz_perfect_square_p(d.get_mpz_t())) {
        Int sn, sd;
        mpz_sqrt(sn.get_mpz_t(), n.get_mpz_t());
        mpz_sqrt(sd.get_mpz_t(), d.get_mpz_t());
        return make_rat(sn, sd);
    }
    return std::nullopt;
}

/// Parses "p", "p/q" or "-p/q".
inline Rat parse_rat(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("parse_rat: empty string");
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rat(Int(s));
        Int num(s.substr(0, slash));
        Int den(s.substr(slash + 1));
        return make_rat(num, den);
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("parse_rat: bad rational '" + s + "'");
    }
}

inline std::string rat_to_string(const Rat& q) { return q.get_str(); }

/// Conversion into an arbitrary numeric type, exact via integer strings.
template <class T>
T rat_cast(const Rat& q) {
    return T(numer(q).get_str()) / T(denom(q).get_str());
}
template <>
inline double rat_cast<double>(const Rat& q) {
    return q.get_d();
}

inline Int int_gcd(const Int& a, const Int& b) {
    Int g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return g;
}

inline Int int_lcm(const Int& a, const Int& b) {
    Int l;
    mpz_lcm(l.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return l;
}

/// gcd on rationals: gcd of numerators over lcm of denominators. Used for
/// content computations; gcd(0,0) = 0.
inline Rat rat_content_gcd(const Rat& a, const Rat& b) {
    return make_rat(int_gcd(numer(a), numer(b)), int_lcm(denom(a), denom(b)));
}

namespace detail {

inline Int pollard_rho(const Int& n) {
    // n odd composite, no factor below the trial-division bound
    for (unsigned long c = 1;; ++c) {
        Int x(2), y(2), d(1);
        while (d == 1) {
            x = (x * x + c) % n;
            y = (y * y + c) % n;
            y = (y * y + c) % n;
            d = int_gcd(x >= y ? x - y : y - x, n);
        }
        if (d != n) return d;
    }
}

inline void factor_into(Int n, std::vector<std::pair<Int, int>>& out) {
    for (Int p = 2; p * p <= n && p < 100000; ++p) {
        if (n % p == 0) {
            int e = 0;
            while (n % p == 0) { n /= p; ++e; }
            out.emplace_back(p, e);
        }
    }
    if (n == 1) return;
    if (mpz_probab_prime_p(n.get_mpz_t(), 32)) {
        out.emplace_back(n, 1);
        return;
    }
    Int d = pollard_rho(n);
    std::vector<std::pair<Int, int>> a, b;
    factor_into(d, a);
    factor_into(n / d, b);
    for (auto& [p, e] : a) {
        int extra = 0;
        for (auto& [q, f] : b)
            if (p == q) { extra = f; f = 0; }
        out.emplace_back(p, e + extra);
    }
    for (auto& [q, f] : b)
        if (f > 0) out.emplace_back(q, f);
}

}  // namespace detail

/// Prime factorization of |n|, n != 0.
inline std::vector<std::pair<Int, int>> factorize(Int n) {
    if (n < 0) n = -n;
    if (n == 0) throw std::domain_error("factorize of zero");
    std::vector<std::pair<Int, int>> out;
    detail::factor_into(n, out);
    return out;
}

/// Divisors of |n|, unsorted. Throws past `limit` (root candidates stay at
/// desk scale in this problem class).
inline std::vector<Int> divisors(const Int& n, std::size_t limit = 100000) {
    auto fac = factorize(n);
    std::vector<Int> divs{Int(1)};
    for (auto& [p, e] : fac) {
        std::size_t sz = divs.size();
        Int pk(1);
        for (int i = 1; i <= e; ++i) {
            pk *= p;
            for (std::size_t j = 0; j < sz; ++j) {
                divs.push_back(divs[j] * pk);
                if (divs.size() > limit) throw std::runtime_error("divisors: too many");
            }
        }
    }
    return divs;
}

/// Largest squarefree s and cofactor m with n = s * m^2 (n > 0).
inline std::pair<Int, Int> squarefree_decompose_int(Int n) {
    if (n <= 0) throw std::domain_error("squarefree_decompose_int: need positive");
    Int s(1), m(1);
    for (Int p = 2; p * p <= n; ++p) {
        if (n % p == 0) {
            int e = 0;
            while (n % p == 0) { n /= p; ++e; }
            for (int i = 0; i < e / 2; ++i) m *= p;
            if (e % 2) s *= p;
        }
    }
    s *= n;
    return {s, m};
}

}  // namespace invmellin
