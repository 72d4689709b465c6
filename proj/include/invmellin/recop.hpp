#pragma once

#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "invmellin/poly.hpp"

namespace invmellin {

/// Linear recurrence operator with polynomial coefficients:
/// sum p[k](n) S^k, S the forward shift n -> n+1. Normalized so that the
/// trailing and leading coefficients are nonzero (trailing zero orders are
/// shifted out; `shift_out` records how many) and the tuple is primitive.
class RecOp {
  public:
    RecOp() = default;
    explicit RecOp(std::vector<Poly> coeffs) : p_(std::move(coeffs)) { normalize(); }

    bool is_zero() const { return p_.empty(); }
    int order() const { return static_cast<int>(p_.size()) - 1; }
    const std::vector<Poly>& coeffs() const { return p_; }
    Poly coeff(std::size_t k) const { return k < p_.size() ? p_[k] : Poly(); }
    const Poly& leading() const {
        if (p_.empty()) throw std::domain_error("leading of zero operator");
        return p_.back();
    }
    /// Number of trailing zero orders removed during normalization; the
    /// normalized recurrence at index n corresponds to the original one at
    /// n + shift_out.
    int shift_out() const { return shift_out_; }

    friend bool operator==(const RecOp& a, const RecOp& b) { return a.p_ == b.p_; }

    /// sum p_k(n) f_{n+k} for a window of values f (f[i] = f at index
    /// base + i).
    Rat apply_at(const std::vector<Rat>& f, long base, long n) const {
        Rat s(0);
        for (int k = 0; k <= order(); ++k) {
            long idx = n + k - base;
            if (idx < 0 || idx >= static_cast<long>(f.size()))
                throw std::out_of_range("RecOp::apply_at: window too small");
            s += p_[k].eval_rat(Rat(n)) * f[idx];
        }
        return s;
    }

  private:
    void normalize() {
        while (!p_.empty() && p_.back().is_zero()) p_.pop_back();
        std::size_t lead_zeros = 0;
        while (lead_zeros < p_.size() && p_[lead_zeros].is_zero()) ++lead_zeros;
        if (lead_zeros == p_.size()) {
            p_.clear();
            return;
        }
        if (lead_zeros > 0) {
            // sum_{k>=z} p_k(n) S^k = (sum p_{k+z}(n+z) S^k) S^z
            std::vector<Poly> q;
            for (std::size_t k = lead_zeros; k < p_.size(); ++k)
                q.push_back(p_[k].shift(Rat(static_cast<long>(lead_zeros))));
            p_ = std::move(q);
            shift_out_ = static_cast<int>(lead_zeros);
        }
        Rat g(0);
        for (const auto& p : p_)
            for (const auto& c : p.coeffs()) g = rat_content_gcd(g, c);
        if (g < 0) g = -g;
        if (p_.back().leading() < 0) g = -g;
        for (auto& p : p_) p = p / g;
    }

    std::vector<Poly> p_;
    int shift_out_ = 0;
};

/// A holonomic sequence: recurrence plus initial values. The recurrence is
/// asserted for all n >= offset.
struct SequenceSpec {
    RecOp rec;
    long offset = 0;
    std::vector<std::pair<long, Rat>> initial_values;
};

/// Largest integer root of the leading coefficient (so windows can start
/// past it), or nullopt if none.
inline std::optional<long> largest_integer_root(const Poly& p) {
    std::optional<long> best;
    for (const auto& [r, m] : rational_roots(p))
        if (is_integer(r)) {
            long v = to_long(r);
            if (!best || v > *best) best = v;
        }
    return best;
}

/// Extends the sequence to cover indices [lo, hi] using the recurrence and
/// initial values. Requires consecutive initial values anchored so the
/// leading coefficient never vanishes on the way up.
inline std::vector<Rat> extend_sequence(const SequenceSpec& seq, long lo, long hi) {
    if (seq.rec.is_zero()) throw std::domain_error("extend_sequence: zero recurrence");
    std::map<long, Rat> vals;
    for (const auto& [n, v] : seq.initial_values) vals[n] = v;
    int d = seq.rec.order();
    if (static_cast<int>(vals.size()) < d)
        throw std::domain_error("extend_sequence: not enough initial values");
    long known_hi = vals.rbegin()->first;
    for (long top = known_hi + 1; top <= hi; ++top) {
        long n = top - d;  // recurrence instance determining f_top
        if (n < seq.offset) throw std::domain_error("extend_sequence: window precedes offset");
        Rat lead = seq.rec.leading().eval_rat(Rat(n));
        if (lead == 0) throw std::domain_error("extend_sequence: leading coefficient vanishes");
        Rat s(0);
        for (int k = 0; k < d; ++k) {
            auto it = vals.find(n + k);
            if (it == vals.end()) throw std::domain_error("extend_sequence: gap in values");
            s += seq.rec.coeff(k).eval_rat(Rat(n)) * it->second;
        }
        vals[top] = -s / lead;
    }
    std::vector<Rat> out;
    for (long n = lo; n <= hi; ++n) {
        auto it = vals.find(n);
        if (it == vals.end()) throw std::domain_error("extend_sequence: value not determined");
        out.push_back(it->second);
    }
    return out;
}

}  // namespace invmellin
