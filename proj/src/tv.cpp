#include "calcert/tv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "calcert/concentration.hpp"
#include "calcert/errors.hpp"

namespace calcert {

double tv_lambda(std::size_t n_train, double delta1) {
    if (n_train < 2) throw ValidationError("tv_lambda requires at least 2 training points");
    if (!(delta1 > 0.0)) throw ValidationError("delta1 must be positive");
    const double n = static_cast<double>(n_train);
    const double arg = 4.0 * (n - 1.0) / delta1;
    if (!(arg >= 1.0)) throw ValidationError("delta1 too large for this n");
    return std::sqrt(std::log(arg) / (8.0 * n));
}

// Direct taut-string pass. Maintains, for the running segment [k0..k], the
// two candidate values that pin the residual walk w_j = sum_{i<=j}(v_i - y_i)
// to the tube boundary -lam (vmin, last touch at km) and +lam (vmax, last
// touch at kp); umin = -w_k(vmin), umax = -w_k(vmax). A jump commits the
// segment at its last touch position and restarts on the suffix.
static void tv_prox(const double* y, std::size_t n, double lam, double* x) {
    if (n == 0) return;
    if (n == 1 || lam <= 0.0) {
        std::copy(y, y + n, x);
        return;
    }
    // Accumulators run in long double: segments can span ~1e6 points with
    // |u| up to lam ~ 1e3, and the downstream optimality gate is 1e-8.
    std::size_t k = 0, k0 = 0, km = 0, kp = 0;
    long double vmin = y[0] - static_cast<long double>(lam);
    long double vmax = y[0] + static_cast<long double>(lam);
    long double umin = lam;
    long double umax = -lam;

    for (;;) {
        if (k == n - 1) {
            if (umin < 0.0) {
                // End-pinned value dips under the floor: bend down at km.
                for (std::size_t i = k0; i <= km; ++i)
                    x[i] = static_cast<double>(vmin);
                k = k0 = km = kp = km + 1;
                vmin = y[k];
                vmax = y[k] + 2.0 * lam;
                umin = lam;
                umax = -lam;
            } else if (umax > 0.0) {
                for (std::size_t i = k0; i <= kp; ++i)
                    x[i] = static_cast<double>(vmax);
                k = k0 = km = kp = kp + 1;
                vmin = y[k] - 2.0 * lam;
                vmax = y[k];
                umin = lam;
                umax = -lam;
            } else {
                // w_{n-1} = 0 exactly; interior constraints already slack.
                const double v = static_cast<double>(
                    vmin + umin / static_cast<long double>(k - k0 + 1));
                for (std::size_t i = k0; i <= n - 1; ++i) x[i] = v;
                return;
            }
            if (k == n - 1) continue;
        }
        if (y[k + 1] + umin < vmin - lam) {
            // Floor-anchored value would pierce the ceiling: negative jump.
            for (std::size_t i = k0; i <= km; ++i)
                x[i] = static_cast<double>(vmin);
            k = k0 = km = kp = km + 1;
            vmin = y[k];
            vmax = y[k] + 2.0 * lam;
            umin = lam;
            umax = -lam;
        } else if (y[k + 1] + umax > vmax + lam) {
            for (std::size_t i = k0; i <= kp; ++i)
                x[i] = static_cast<double>(vmax);
            k = k0 = km = kp = kp + 1;
            vmin = y[k] - 2.0 * lam;
            vmax = y[k];
            umin = lam;
            umax = -lam;
        } else {
            ++k;
            umin += y[k] - vmin;
            umax += y[k] - vmax;
            if (umin >= lam) {
                vmin += (umin - lam) / static_cast<double>(k - k0 + 1);
                umin = lam;
                km = k;
            }
            if (umax <= -lam) {
                vmax += (umax + lam) / static_cast<double>(k - k0 + 1);
                umax = -lam;
                kp = k;
            }
        }
    }
}

std::vector<double> tv_denoise(std::span<const double> y, double lambda) {
    if (y.empty()) throw ValidationError("tv_denoise on empty input");
    if (!(lambda >= 0.0)) throw ValidationError("lambda must be non-negative");
    std::vector<double> x(y.size());
    // The (1/(2n)) data weighting rescales the penalty by n.
    tv_prox(y.data(), y.size(), lambda * static_cast<double>(y.size()), x.data());

    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    for (double& v : x) {
        if (v < *lo - 1e-9 || v > *hi + 1e-9)
            throw std::logic_error("tv_denoise left the data range");
        v = std::clamp(v, *lo, *hi);  // shave pure roundoff
    }
    return x;
}

double tv_kkt_residual(std::span<const double> y, std::span<const double> v,
                       double lambda) {
    if (y.size() != v.size() || y.empty())
        throw ValidationError("tv_kkt_residual size mismatch");
    const std::size_t n = y.size();
    const long double lam =
        static_cast<long double>(lambda) * static_cast<long double>(n);
    const double jump_tol = 1e-9;
    // long double running sum: n plain double adds with |w| up to lam would
    // alone exceed the 1e-8 optimality gate at n ~ 1e6
    long double w = 0.0L, resid = 0.0L;
    for (std::size_t k = 0; k < n; ++k) {
        w += static_cast<long double>(v[k]) - y[k];
        if (k + 1 == n) {
            resid = std::max(resid, std::abs(w));
        } else if (v[k + 1] > v[k] + jump_tol) {
            resid = std::max(resid, std::abs(w - lam));
        } else if (v[k + 1] < v[k] - jump_tol) {
            resid = std::max(resid, std::abs(w + lam));
        } else {
            resid = std::max(resid, std::max(0.0L, std::abs(w) - lam));
        }
    }
    return static_cast<double>(resid);
}

double StepSurrogate::eval(double s) const {
    auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), s);
    if (it == breakpoints.begin()) return values.front();
    return values[static_cast<std::size_t>(it - breakpoints.begin()) - 1];
}

StepSurrogate fit_step_surrogate(const ScoredDataset& train, double lambda) {
    const std::size_t n = train.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return train.scores[a] < train.scores[b];
    });

    std::vector<double> y(n);
    StepSurrogate s;
    s.breakpoints.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        s.breakpoints[i] = train.scores[order[i]];
        y[i] = static_cast<double>(train.labels[order[i]]);
    }
    s.values = tv_denoise(y, lambda);
    if (tv_kkt_residual(y, s.values, lambda) > 1e-8)
        throw std::logic_error("tv fit failed its optimality certificate");

    s.total_variation_hat = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i)
        s.total_variation_hat += std::abs(s.values[i + 1] - s.values[i]);
    return s;
}

double tvb(std::size_t n_train, double delta, double V) {
    if (n_train < 2) throw ValidationError("tvb requires at least 2 training points");
    if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0,1)");
    if (!(V >= 0.0)) throw ValidationError("V must be non-negative");
    const double n = static_cast<double>(n_train);
    const double t1 = std::sqrt(0.5 * std::log(4.0 / delta));
    const double t2 = std::sqrt(n / 8.0 * std::log(4.0 * (n - 1.0) / delta));
    const double core =
        2.0 * t1 * t1 + 2.0 * t1 * std::sqrt(t1 * t1 + 4.0 * t2 * V) + 4.0 * t2 * V;
    return std::sqrt(core / n);
}

double ptb(double V, double V_hat, std::size_t n_train, double delta2, double delta3) {
    if (!(V >= 0.0) || !(V_hat >= 0.0))
        throw ValidationError("total variations must be non-negative");
    return (V + V_hat) * dkw_bound(n_train, delta2) + dkw_bound(n_train, delta3);
}

BoundReport certify_tv(const ScoredDataset& train, const ScoredDataset& valid,
                       double V, const DeltaBudget& budget) {
    train.validate();
    valid.validate();
    if (budget.part_count() != 4)
        throw ValidationError("tv certificate needs a 4-part delta budget");
    if (!(V >= 0.0)) throw ValidationError("V must be non-negative");

    const double lambda = tv_lambda(train.size(), budget.part(0));
    const StepSurrogate surrogate = fit_step_surrogate(train, lambda);

    std::vector<double> resid(valid.size());
    for (std::size_t i = 0; i < valid.size(); ++i)
        resid[i] = std::abs(valid.scores[i] - surrogate.eval(valid.scores[i]));

    BoundReport report;
    report.method = "tv";
    report.n_train = train.size();
    report.n_valid = valid.size();
    report.delta = budget.total();
    report.terms["empirical"] = stable_mean(resid);
    report.terms["bernstein"] =
        bernstein_bound(valid.size(), budget.part(3), empirical_variance(resid));
    report.terms["tvb"] = tvb(train.size(), budget.part(0), V);
    report.terms["ptb"] =
        ptb(V, surrogate.total_variation_hat, train.size(), budget.part(1), budget.part(2));
    report.details["lambda"] = lambda;
    report.details["v_assumed"] = V;
    report.details["v_hat"] = surrogate.total_variation_hat;
    finalize_bound(report);
    return report;
}

}  // namespace calcert
