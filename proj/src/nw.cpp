#include "calcert/nw.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "calcert/concentration.hpp"
#include "calcert/errors.hpp"
#include "calcert/parallel.hpp"
#include "calcert/rng.hpp"

namespace calcert {

double gudermann(double u) {
    const double a = std::abs(u);
    // sinh overflows near 710; the tail is already pi/2 to double precision
    // long before the asymptotic switch can be seen.
    if (a > 700.0) {
        const double tail = 2.0 * std::exp(-a);
        return u > 0 ? (M_PI_2 - tail) : -(M_PI_2 - tail);
    }
    return std::atan(std::sinh(u));
}

double inverse_gudermann(double a) {
    if (!(a > -M_PI_2 && a < M_PI_2))
        throw ValidationError("inverse_gudermann argument outside (-pi/2, pi/2)");
    return std::asinh(std::tan(a));
}

double sech_normalizer(double s_orig, double h) {
    if (!(s_orig >= 0.0 && s_orig <= 1.0))
        throw ValidationError("s_orig must lie in [0,1]");
    if (!(h > 0.0)) throw ValidationError("bandwidth must be positive");
    return h * (gudermann((1.0 - s_orig) / h) + gudermann(s_orig / h));
}

double sech_cdf(double s, double s_orig, double h) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    const double lo = gudermann(-s_orig / h);
    const double hi = gudermann((1.0 - s_orig) / h);
    return (gudermann((s - s_orig) / h) - lo) / (hi - lo);
}

double sample_sech(double s_orig, double h, double u01) {
    const double lo = gudermann(-s_orig / h);
    const double hi = gudermann((1.0 - s_orig) / h);
    // Keep extreme draws strictly inside the open domain of the inverse.
    const double amax = std::nextafter(M_PI_2, 0.0);
    const double a = std::clamp(lo + u01 * (hi - lo), -amax, amax);
    const double s = s_orig + h * inverse_gudermann(a);
    return std::clamp(s, 0.0, 1.0);
}

std::vector<double> perturb_scores(std::span<const double> scores, double h,
                                   std::uint64_t seed) {
    if (!(h > 0.0)) throw ValidationError("bandwidth must be positive");
    std::vector<double> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double s = scores[i];
        if (!(s >= 0.0 && s <= 1.0))
            throw ValidationError("score out of range at index " + std::to_string(i));
        Rng rng(derive_seed(seed, {i}));
        out[i] = sample_sech(s, h, rng.next_uniform());
    }
    return out;
}

DerivativeBounds derivative_bounds(double h) {
    if (!(h > 0.0)) throw ValidationError("bandwidth must be positive");
    return {1.0 / (2.0 * h), 1.5 / (h * h)};
}

double plugin_bandwidth(double b1, double b2, std::size_t n_train) {
    if (!(b1 > 0.0) || !(b2 >= 0.0))
        throw ValidationError("plugin_bandwidth needs b1 > 0, b2 >= 0");
    if (n_train < 1) throw ValidationError("plugin_bandwidth requires n >= 1");
    const double a = 3.0 * b1 / 8.0;
    const double b = b2 / 10.0;
    const double c = 1.15 / (2.0 * std::sqrt(2.0 * static_cast<double>(n_train)));
    const auto f = [&](double t) {
        return 2.0 * b * std::pow(t, 5) + a * t * t * t - 0.5 * c;
    };
    // Monotone on t > 0: bisect a bracket, then polish with Newton.
    double lo = 0.0, hi = std::cbrt(0.5 * c / a);  // cubic-only root bounds from above
    while (f(hi) < 0.0) hi *= 2.0;
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    double t = 0.5 * (lo + hi);
    for (int i = 0; i < 8; ++i) {
        const double deriv = 10.0 * b * std::pow(t, 4) + 3.0 * a * t * t;
        if (deriv <= 0.0) break;
        const double step = f(t) / deriv;
        const double next = t - step;
        if (next > 0.0) t = next;
        if (std::abs(step) < 1e-17 * t) break;
    }
    if (std::abs(f(t)) > 1e-12 * c)
        throw std::logic_error("plugin bandwidth root did not converge");
    return std::clamp(t * t, 1e-4, 0.25);
}

double envelope_R(double b1, double b2, double h_s) {
    if (!(b1 >= 0.0) || !(b2 >= 0.0) || !(h_s > 0.0))
        throw ValidationError("envelope_R needs non-negative bounds and h_s > 0");
    return b1 * h_s + 0.5 * b2 * h_s * h_s + 0.5;
}

NwSurrogate::NwSurrogate(const ScoredDataset& train, double h_perturb,
                         std::optional<double> h_smooth) {
    train.validate();
    db_ = derivative_bounds(h_perturb);
    h_smooth_ = h_smooth ? *h_smooth : plugin_bandwidth(db_.b1, db_.b2, train.size());
    if (!(h_smooth_ > 0.0)) throw ValidationError("smoother bandwidth must be positive");
    R_ = envelope_R(db_.b1, db_.b2, h_smooth_);

    const std::size_t n = train.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return train.scores[a] < train.scores[b];
    });
    scores_.resize(n);
    labels_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        scores_[i] = train.scores[order[i]];
        labels_[i] = static_cast<double>(train.labels[order[i]]);
    }
}

NwSurrogate::Window NwSurrogate::window(double s) const {
    const auto lo =
        std::lower_bound(scores_.begin(), scores_.end(), s - h_smooth_);
    const auto hi = std::upper_bound(lo, scores_.end(), s + h_smooth_);
    return {static_cast<std::size_t>(lo - scores_.begin()),
            static_cast<std::size_t>(hi - scores_.begin())};
}

std::size_t NwSurrogate::nearest(double s) const {
    const auto it = std::lower_bound(scores_.begin(), scores_.end(), s);
    if (it == scores_.begin()) return 0;
    if (it == scores_.end()) return scores_.size() - 1;
    const std::size_t right = static_cast<std::size_t>(it - scores_.begin());
    const std::size_t left = right - 1;
    // Ties go to the smaller score.
    return (s - scores_[left] <= scores_[right] - s) ? left : right;
}

NwSurrogate::Eval NwSurrogate::evaluate(double s) const {
    const Window w = window(s);
    double wsum = 0.0;
    for (std::size_t i = w.lo; i < w.hi; ++i) {
        const double u = (s - scores_[i]) / h_smooth_;
        const double base = 1.0 - u * u;
        if (base > 0.0) wsum += std::pow(base, kTau);
    }
    Eval out;
    if (wsum <= 0.0) {
        // No kernel mass: nearest neighbor carries weight 1.
        const std::size_t j = nearest(s);
        const double d = std::abs(s - scores_[j]);
        out.value = labels_[j];
        out.g = db_.b1 * d + 0.5 * db_.b2 * d * d + 0.5;
        out.fallback = true;
        return out;
    }
    double value = 0.0, g_abs = 0.0, g_sq = 0.0, w2 = 0.0;
    for (std::size_t i = w.lo; i < w.hi; ++i) {
        const double u = (s - scores_[i]) / h_smooth_;
        const double base = 1.0 - u * u;
        if (base <= 0.0) continue;
        const double wi = std::pow(base, kTau) / wsum;
        const double d = std::abs(s - scores_[i]);
        value += wi * labels_[i];
        g_abs += wi * d;
        g_sq += wi * d * d;
        w2 += wi * wi;
    }
    out.value = value;
    out.g = db_.b1 * g_abs + 0.5 * db_.b2 * g_sq + 0.5 * std::sqrt(w2);
    return out;
}

std::vector<double> NwSurrogate::weights(double s) const {
    std::vector<double> w(scores_.size(), 0.0);
    const Window win = window(s);
    double wsum = 0.0;
    for (std::size_t i = win.lo; i < win.hi; ++i) {
        const double u = (s - scores_[i]) / h_smooth_;
        const double base = 1.0 - u * u;
        if (base > 0.0) {
            w[i] = std::pow(base, kTau);
            wsum += w[i];
        }
    }
    if (wsum <= 0.0) {
        w.assign(scores_.size(), 0.0);
        w[nearest(s)] = 1.0;
        return w;
    }
    for (double& x : w) x /= wsum;
    return w;
}

BoundReport certify_nw(const ScoredDataset& train, const ScoredDataset& valid,
                       double h_perturb, const DeltaBudget& budget,
                       std::optional<double> h_smooth) {
    valid.validate();
    if (budget.part_count() != 2)
        throw ValidationError("nw certificate needs a 2-part delta budget");

    const NwSurrogate surrogate(train, h_perturb, h_smooth);
    const double R = surrogate.envelope();

    std::vector<double> resid(valid.size()), scaled(valid.size());
    std::size_t fallbacks = 0;
    for (std::size_t i = 0; i < valid.size(); ++i) {
        const auto e = surrogate.evaluate(valid.scores[i]);
        resid[i] = std::abs(e.value - valid.scores[i]);
        if (e.fallback) {
            ++fallbacks;
            scaled[i] = 1.0;
        } else {
            if (e.g > R * (1.0 + 1e-12))
                throw std::logic_error("smoothing proxy exceeded its envelope");
            scaled[i] = std::min(e.g / R, 1.0);
        }
    }

    BoundReport report;
    report.method = "nw";
    report.n_train = train.size();
    report.n_valid = valid.size();
    report.delta = budget.total();
    report.terms["empirical"] = stable_mean(resid);
    report.terms["smoothing"] = R * stable_mean(scaled);
    report.terms["bernstein_residual"] =
        bernstein_bound(valid.size(), budget.part(0), empirical_variance(resid));
    report.terms["bernstein_smoothing"] =
        R * bernstein_bound(valid.size(), budget.part(1), empirical_variance(scaled));
    report.details["b1"] = surrogate.bounds().b1;
    report.details["b2"] = surrogate.bounds().b2;
    report.details["h_perturb"] = h_perturb;
    report.details["h_smooth"] = surrogate.h_smooth();
    report.details["envelope"] = R;
    report.details["tau"] = NwSurrogate::kTau;
    report.details["fallback_count"] = static_cast<double>(fallbacks);
    finalize_bound(report);
    return report;
}

}  // namespace calcert
