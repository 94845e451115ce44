// Independent re-implementations used only by tests: every formula here is
// written from the definitions (long double, different algebraic forms and
// algorithms than the library) so agreement is evidence, not tautology.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "calcert/synth.hpp"

namespace oracles {

// ---- concentration -------------------------------------------------------

inline long double o_bernstein(long double n, long double delta,
                               long double var) {
    const long double ln = std::log(3.0L / delta);
    return std::sqrt(2.0L * var * ln / n) + 3.0L * ln / n;
}

inline long double o_dkw(long double n, long double delta) {
    return std::sqrt(std::log(2.0L / delta) / (2.0L * n));
}

// ---- tv ------------------------------------------------------------------

inline long double o_tv_lambda(long double n, long double delta1) {
    return std::sqrt(std::log(4.0L * (n - 1.0L) / delta1) / (8.0L * n));
}

inline long double o_tvb(long double n, long double delta, long double V) {
    const long double t1 = std::sqrt(0.5L * std::log(4.0L / delta));
    const long double t2 =
        std::sqrt(n / 8.0L * std::log(4.0L * (n - 1.0L) / delta));
    return std::sqrt(
        (2.0L * t1 * t1 + 2.0L * t1 * std::sqrt(t1 * t1 + 4.0L * t2 * V) +
         4.0L * t2 * V) /
        n);
}

inline long double o_ptb(long double V, long double V_hat, long double n,
                         long double d2, long double d3) {
    return (V + V_hat) * o_dkw(n, d2) + o_dkw(n, d3);
}

// True fused-lasso objective F(v) = 1/(2n)||y-v||^2 + lambda sum|dv|.
inline long double tv_objective(std::span<const double> y,
                                std::span<const double> v, double lambda) {
    const std::size_t n = y.size();
    long double quad = 0.0L, tv = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        const long double d = static_cast<long double>(y[i]) - v[i];
        quad += d * d;
    }
    for (std::size_t i = 0; i + 1 < n; ++i)
        tv += std::abs(static_cast<long double>(v[i + 1]) - v[i]);
    return quad / (2.0L * n) + static_cast<long double>(lambda) * tv;
}

// Exact minimum of F by enumerating boundary sign vectors eps in
// {-1,0,+1}^(n-1). For fixed signs the restricted problem is smooth with
// per-segment closed form m_j = mean(y_j) + (lambda n / L_j)(eps_r - eps_l),
// and the true minimizer's own sign vector is in the enumeration, so the
// minimum over all candidates' true objectives is the global optimum.
inline long double brute_force_tv(std::span<const double> y, double lambda) {
    const std::size_t n = y.size();
    if (n == 0) throw std::invalid_argument("empty input");
    if (n > 13) throw std::invalid_argument("instance too large to enumerate");
    const long double lc = static_cast<long double>(lambda) * n;

    std::vector<long double> ps(n + 1, 0.0L), ps2(n + 1, 0.0L);
    for (std::size_t i = 0; i < n; ++i) {
        ps[i + 1] = ps[i] + y[i];
        ps2[i + 1] = ps2[i] + static_cast<long double>(y[i]) * y[i];
    }

    std::size_t total = 1;
    for (std::size_t i = 0; i + 1 < n; ++i) total *= 3;

    long double best = std::numeric_limits<long double>::infinity();
    std::vector<int> eps(n > 0 ? n - 1 : 0, 0);
    std::vector<long double> seg_vals;
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t c = code;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            eps[i] = static_cast<int>(c % 3) - 1;
            c /= 3;
        }
        seg_vals.clear();
        long double quad = 0.0L;
        int left_sign = 0;
        std::size_t start = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const int right_sign = (i + 1 < n) ? eps[i] : 0;
            if (i + 1 < n && right_sign == 0) continue;
            const std::size_t len = i + 1 - start;
            const long double mean = (ps[i + 1] - ps[start]) / len;
            const long double m = mean + lc * (right_sign - left_sign) / len;
            quad += (ps2[i + 1] - ps2[start]) -
                    2.0L * m * (ps[i + 1] - ps[start]) + len * m * m;
            seg_vals.push_back(m);
            left_sign = right_sign;
            start = i + 1;
        }
        long double tv = 0.0L;
        for (std::size_t j = 0; j + 1 < seg_vals.size(); ++j)
            tv += std::abs(seg_vals[j + 1] - seg_vals[j]);
        const long double obj =
            quad / (2.0L * n) + static_cast<long double>(lambda) * tv;
        best = std::min(best, obj);
    }
    return best;
}

// ---- nw ------------------------------------------------------------------

// Gudermannian via the half-angle identity (the library uses atan(sinh u)).
inline long double o_gd(long double u) {
    return 2.0L * std::atan(std::tanh(0.5L * u));
}

inline long double o_sech_normalizer(long double s0, long double h) {
    return h * (o_gd((1.0L - s0) / h) + o_gd(s0 / h));
}

inline long double o_sech_cdf(long double s, long double s0, long double h) {
    const long double lo = o_gd((0.0L - s0) / h);
    const long double hi = o_gd((1.0L - s0) / h);
    if (s <= 0.0L) return 0.0L;
    if (s >= 1.0L) return 1.0L;
    return (o_gd((s - s0) / h) - lo) / (hi - lo);
}

inline long double o_envelope_R(long double b1, long double b2,
                                long double hs) {
    return b1 * hs + 0.5L * b2 * hs * hs + 0.5L;
}

// Residual of the plug-in quintic 2(b2/10)t^5 + (3 b1/8)t^3 - c/2 at t.
inline long double o_plugin_residual(long double b1, long double b2,
                                     long double n, long double t) {
    const long double c = 1.15L / (2.0L * std::sqrt(2.0L * n));
    return 0.2L * b2 * t * t * t * t * t + 0.375L * b1 * t * t * t - 0.5L * c;
}

// Romberg integration (smooth integrands only).
inline long double o_romberg(const std::function<long double(long double)>& f,
                             long double a, long double b, int levels = 22) {
    std::vector<long double> row(levels, 0.0L), prev(levels, 0.0L);
    long double h = b - a;
    prev[0] = 0.5L * h * (f(a) + f(b));
    std::size_t points = 1;
    for (int i = 1; i < levels; ++i) {
        h *= 0.5L;
        long double sum = 0.0L;
        for (std::size_t k = 0; k < points; ++k)
            sum += f(a + (2.0L * k + 1.0L) * h);
        row[0] = 0.5L * prev[0] + h * sum;
        long double p4 = 4.0L;
        for (int j = 1; j <= i; ++j) {
            row[j] = (p4 * row[j - 1] - prev[j - 1]) / (p4 - 1.0L);
            p4 *= 4.0L;
        }
        if (i > 3 && std::abs(row[i] - prev[i - 1]) < 1e-15L * (1.0L + std::abs(row[i])))
            return row[i];
        std::swap(row, prev);
        points *= 2;
    }
    return prev[levels - 1];
}

// KS distance between a sample and a continuous CDF.
inline double ks_distance(std::vector<double> samples,
                          const std::function<double(double)>& cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double ks = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double F = cdf(samples[i]);
        ks = std::max(ks, std::abs(F - (i + 1) / n));
        ks = std::max(ks, std::abs(F - i / n));
    }
    return ks;
}

// ---- ground-truth CE by closed forms -------------------------------------

namespace detail {

// Monotone-function root by bisection; fn(lo) and fn(hi) must straddle 0.
inline long double bisect(const std::function<long double(long double)>& fn,
                          long double lo, long double hi) {
    long double flo = fn(lo);
    for (int it = 0; it < 200; ++it) {
        const long double mid = 0.5L * (lo + hi);
        const long double fm = fn(mid);
        if ((flo <= 0.0L) == (fm <= 0.0L)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-18L) break;
    }
    return 0.5L * (lo + hi);
}

// integral of |s - v| via the signed antiderivative
inline long double int_abs_linear(long double a, long double b, long double v) {
    const auto G = [v](long double x) {
        const long double d = x - v;
        return 0.5L * d * std::abs(d);
    };
    return G(b) - G(a);
}

// integral over [a,b] of |s - clip(s + A sin(w s))| assuming the regime is
// constant on (a,b); the regime is probed at the midpoint.
inline long double wiggle_piece(long double a, long double b, long double A,
                                long double w) {
    const long double mid = 0.5L * (a + b);
    const long double u = mid + A * std::sin(w * mid);
    if (u < 0.0L)  // eta = 0, integrand = s
        return 0.5L * (b * b - a * a);
    if (u > 1.0L)  // eta = 1, integrand = 1 - s
        return (b - a) - 0.5L * (b * b - a * a);
    // integrand = |A sin(w s)| with a single sign
    const long double sign = std::sin(w * mid) >= 0.0L ? 1.0L : -1.0L;
    return sign * (A / w) * (std::cos(w * a) - std::cos(w * b));
}

inline long double wiggle_integral(long double a, long double b, long double A,
                                   long double w) {
    // knots: sine zeros and u-extrema make u monotone and sin single-signed
    // per cell; then clip crossings inside a cell are unique and bisectable.
    std::vector<long double> knots{a, b};
    for (long long j = static_cast<long long>(std::ceil(a * w / M_PIl));
         j * M_PIl / w < b; ++j) {
        const long double z = j * M_PIl / w;
        if (z > a && z < b) knots.push_back(z);
    }
    if (A > 0.0L && w * A > 1.0L) {
        const long double base = std::acos(-1.0L / (w * A));
        for (int k = 0;; ++k) {
            const long double lo = (2.0L * M_PIl * k + base) / w;
            const long double hi = (2.0L * M_PIl * (k + 1) - base) / w;
            if (lo >= b) break;
            if (lo > a && lo < b) knots.push_back(lo);
            if (hi > a && hi < b) knots.push_back(hi);
        }
    }
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    const auto u = [A, w](long double s) { return s + A * std::sin(w * s); };
    long double total = 0.0L;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        long double x0 = knots[i], x1 = knots[i + 1];
        std::vector<long double> cuts{x0, x1};
        const long double u0 = u(x0), u1 = u(x1);
        if ((u0 < 0.0L) != (u1 < 0.0L))
            cuts.push_back(bisect([&](long double s) { return u(s); }, x0, x1));
        if ((u0 < 1.0L) != (u1 < 1.0L))
            cuts.push_back(
                bisect([&](long double s) { return u(s) - 1.0L; }, x0, x1));
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t j = 0; j + 1 < cuts.size(); ++j)
            total += wiggle_piece(cuts[j], cuts[j + 1], A, w);
    }
    return total;
}

// integral over [a,b] of |s - eta(s)| for one family, closed forms only.
inline long double ce_integral(const calcert::EtaSpec& spec, long double a,
                               long double b) {
    using calcert::EtaFamily;
    switch (spec.family) {
        case EtaFamily::identity:
            return 0.0L;
        case EtaFamily::offset: {
            const long double c = spec.c;
            if (c == 0.0L) return 0.0L;
            if (c > 0.0L) {
                // integrand: c for s <= 1-c, else 1-s
                const long double cut = std::clamp(1.0L - c, a, b);
                return c * (cut - a) +
                       ((b - cut) - 0.5L * (b * b - cut * cut));
            }
            // c < 0: integrand: s for s <= -c, else -c
            const long double cut = std::clamp(-c, a, b);
            return 0.5L * (cut * cut - a * a) + (-c) * (b - cut);
        }
        case EtaFamily::smooth_wiggle:
        case EtaFamily::hf_adversarial:
            return wiggle_integral(a, b, spec.amplitude,
                                   2.0L * M_PIl * spec.frequency);
        case EtaFamily::step: {
            long double total = 0.0L;
            long double lo = 0.0L;
            for (std::size_t j = 0; j < spec.step_values.size(); ++j) {
                const long double hi =
                    j < spec.step_breaks.size() ? spec.step_breaks[j] : 1.0L;
                const long double x0 = std::max(lo, a), x1 = std::min(hi, b);
                if (x1 > x0)
                    total += int_abs_linear(x0, x1, spec.step_values[j]);
                lo = hi;
            }
            return total;
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace detail

inline long double oracle_true_ce(const calcert::EtaSpec& spec,
                                  calcert::ScoreLaw law) {
    if (law == calcert::ScoreLaw::uniform)
        return detail::ce_integral(spec, 0.0L, 1.0L);
    // mixture: 0.7 U[0,1] + 0.3 U[0.4, 0.6]
    return 0.7L * detail::ce_integral(spec, 0.0L, 1.0L) +
           1.5L * detail::ce_integral(spec, 0.4L, 0.6L);
}

}  // namespace oracles
