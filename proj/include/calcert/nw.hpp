#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "calcert/dataset.hpp"
#include "calcert/report.hpp"

namespace calcert {

// Gudermannian gd(u) = atan(sinh(u)) and its inverse asinh(tan(a));
// antiderivative pair for the sech kernel. Safe for |u| past the sinh
// overflow point (asymptote pi/2 - 2 e^{-|u|}).
double gudermann(double u);
double inverse_gudermann(double a);

// Mass of the kernel sech((s - s_orig)/h) on [0,1]:
//   Z = h (gd((1-s_orig)/h) + gd(s_orig/h)).
// Symmetric about s_orig = 1/2, minimal at the endpoints.
double sech_normalizer(double s_orig, double h);

// CDF on [0,1] of the normalized kernel centered at s_orig.
double sech_cdf(double s, double s_orig, double h);

// Exact inverse-CDF draw; u01 in [0,1).
double sample_sech(double s_orig, double h, double u01);

// One independent draw per index, seeded by (seed, index): parallel and
// serial evaluation orders emit identical outputs.
std::vector<double> perturb_scores(std::span<const double> scores, double h,
                                   std::uint64_t seed);

// Curvature caps a perturbed calibration curve inherits from the kernel:
// |eta'| <= b1 = 1/(2h), |eta''| <= b2 = 1.5/h^2.
struct DerivativeBounds {
    double b1 = 0.0;
    double b2 = 0.0;
};
DerivativeBounds derivative_bounds(double h);

// Smoother bandwidth h_s = t^2 where t is the positive root of
//   2 (b2/10) t^5 + (3 b1/8) t^3 = 1.15 / (4 sqrt(2 n_train)),
// clipped into [1e-4, 1/4]. The unclipped root satisfies the quintic to a
// residual below 1e-12 of the constant term.
double plugin_bandwidth(double b1, double b2, std::size_t n_train);

// Pointwise envelope for the smoothing-error proxy when all contributing
// points lie within h_s: R = b1 h_s + b2 h_s^2 / 2 + 1/2.
double envelope_R(double b1, double b2, double h_s);

// Kernel-weighted label smoother over the training scores. Weights are
// Epanechnikov at bandwidth h_smooth, tempered by exponent tau and
// renormalized; queries with no kernel mass fall back to the nearest
// neighbor (ties to the smaller score).
class NwSurrogate {
public:
    static constexpr double kTau = 1.2;

    NwSurrogate(const ScoredDataset& train, double h_perturb,
                std::optional<double> h_smooth = std::nullopt);

    struct Eval {
        double value = 0.0;  // smoothed label
        double g = 0.0;      // bias + noise proxy at the query
        bool fallback = false;
    };
    Eval evaluate(double s) const;

    // Tempered, normalized weights over the training points (mostly zero;
    // returned dense for inspection in tests).
    std::vector<double> weights(double s) const;

    double h_smooth() const { return h_smooth_; }
    DerivativeBounds bounds() const { return db_; }
    double envelope() const { return R_; }
    std::size_t train_size() const { return scores_.size(); }

private:
    std::vector<double> scores_;  // ascending
    std::vector<double> labels_;
    double h_smooth_ = 0.0;
    DerivativeBounds db_;
    double R_ = 0.0;

    struct Window {
        std::size_t lo = 0, hi = 0;  // [lo, hi) with positive base weight
    };
    Window window(double s) const;
    std::size_t nearest(double s) const;
};

// Fixed-split certificate under the derivative caps implied by the
// perturbation bandwidth. Budget parts: (0) residual Bernstein,
// (1) smoothing-proxy Bernstein. Assumes `valid`/`train` scores come from
// the perturbed classifier. Fallback queries are clamped to 1 in the scaled
// smoothing sequence and counted in details.fallback_count.
BoundReport certify_nw(const ScoredDataset& train, const ScoredDataset& valid,
                       double h_perturb, const DeltaBudget& budget,
                       std::optional<double> h_smooth = std::nullopt);

}  // namespace calcert
