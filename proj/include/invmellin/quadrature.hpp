#pragma once

#include <boost/math/special_functions/fpclassify.hpp>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "invmellin/real.hpp"

namespace invmellin {

struct DivergentIntegral : std::runtime_error {
    DivergentIntegral() : std::runtime_error("integral diverges or evaluation is singular") {}
};

/// Tanh-sinh quadrature on (0,1) with abscissas handed to the integrand as
/// (x, 1-x), both computed to full relative precision, so endpoint
/// cancellations like 1-sqrt(1-x) can be evaluated stably. Nodes near the
/// endpoints are evaluated at boosted precision to absorb the cancellation
/// loss inside general integrands.
class TanhSinh {
  public:
    explicit TanhSinh(unsigned decimal_digits, int max_level = 11)
        : digits_(decimal_digits), max_level_(max_level) {}

    /// g(x, omx) fills a vector of m integrand values at x (omx = 1-x).
    /// Returns the m integrals; err_out gets the last level-to-level change.
    template <class G>
    std::vector<Real> integrate_vec(G&& g, std::size_t m, Real* err_out = nullptr) const {
        unsigned base = digits_ + 10;
        PrecisionGuard guard(base);
        const Real tol = pow(Real(10), -static_cast<int>(digits_ + 2));
        const Real cutoff = pow(Real(10), -static_cast<int>(base + 10));
        std::vector<Real> total(m, Real(0));  // sum of w*g over all nodes
        std::vector<Real> prev(m, Real(0));   // previous level estimates
        Real err = 0;
        bool converged = false;
        double h = 1.0;
        for (int level = 0; level <= max_level_; ++level, h /= 2) {
            std::vector<Real> scale(m, Real(1));
            for (std::size_t i = 0; i < m; ++i) scale[i] += abs(total[i]) * Real(h);
            // at level 0 every multiple of h, afterwards only odd multiples
            for (int dir : {1, -1}) {
                int tiny_run = 0;
                for (long j = (level == 0 ? (dir > 0 ? 0 : 1) : 1);; j += (level == 0 ? 1 : 2)) {
                    double t = dir * j * h;
                    if (t * dir > tmax_) break;
                    if (!add_node(g, m, t, base, cutoff, scale, total)) {
                        if (++tiny_run >= 3) break;
                    } else {
                        tiny_run = 0;
                    }
                }
            }
            std::vector<Real> cur(m);
            Real diff = 0, mag = 0;
            for (std::size_t i = 0; i < m; ++i) {
                cur[i] = Real(h) * total[i];
                diff += abs(cur[i] - prev[i]);
                mag += abs(cur[i]);
            }
            if (level > 0) {
                err = diff;
                if (diff <= tol * (mag + 1)) {
                    prev = std::move(cur);
                    converged = true;
                    break;
                }
            }
            prev = std::move(cur);
        }
        for (auto& v : prev)
            if (!boost::math::isfinite(v)) throw DivergentIntegral();
        if (!converged && err_out == nullptr) {
            // no caller-side error handling requested: refuse silently wrong
            // values when far from convergence
            Real mag = 0;
            for (const auto& v : prev) mag += abs(v);
            if (err > sqrt(tol) * (mag + 1)) throw DivergentIntegral();
        }
        if (err_out) *err_out = err;
        return prev;
    }

    template <class G>
    Real integrate(G&& g, Real* err_out = nullptr) const {
        auto wrap = [&](const Real& x, const Real& omx, std::vector<Real>& out) {
            out[0] = g(x, omx);
        };
        return integrate_vec(wrap, 1, err_out)[0];
    }

    unsigned digits() const { return digits_; }

  private:
    template <class G>
    bool add_node(G& g, std::size_t m, double t, unsigned base, const Real& cutoff,
                  const std::vector<Real>& scale, std::vector<Real>& total) const {
        // magnitude of the endpoint distance: -log10 min(x,1-x) ~ 2 sinh|t| / ln 10
        double s0 = std::sinh(std::abs(t));
        unsigned extra = static_cast<unsigned>(2.0 * 2.0 * s0 * 0.4342944819) + 20;
        std::vector<Real> vals(m);
        Real w;
        {
            PrecisionGuard boost_guard(base + extra);
            Real s = sinh(Real(t));
            Real u = exp(-2 * s);
            Real x = 1 / (1 + u), omx = u / (1 + u);
            w = 2 * cosh(Real(t)) * x * omx;
            g(x, omx, vals);
        }
        bool significant = false;
        for (std::size_t i = 0; i < m; ++i) {
            Real term(vals[i] * w, base);
            if (!boost::math::isfinite(term)) throw DivergentIntegral();
            if (abs(term) > cutoff * scale[i]) significant = true;
            total[i] += term;
        }
        return significant;
    }

    unsigned digits_;
    int max_level_;
    static constexpr double tmax_ = 7.5;
};

}  // namespace invmellin
