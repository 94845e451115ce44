#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "calcert/dataset.hpp"
#include "calcert/report.hpp"

namespace calcert {

// Regularizer weight for the denoising objective
//   (1/(2n)) ||y - v||^2 + lambda ||Dv||_1,  (Dv)_i = v_{i+1} - v_i:
//   lambda = sqrt(ln(4(n-1)/delta1) / (8n)).
double tv_lambda(std::size_t n_train, double delta1);

// Exact minimizer of the objective above (direct non-iterative algorithm).
// For binary y the solution stays inside [min y, max y], so the [0,1] box
// never activates; that is asserted post hoc rather than projected.
std::vector<double> tv_denoise(std::span<const double> y, double lambda);

// Max violation of the fused-lasso optimality conditions at v; the running
// residual sums w_k = sum_{i<=k}(v_i - y_i) must satisfy |w_k| <= n*lambda,
// w_n = 0, and w_k = n*lambda*sign(v_{k+1}-v_k) wherever v jumps.
double tv_kkt_residual(std::span<const double> y, std::span<const double> v,
                       double lambda);

// Piecewise-constant surrogate: value of the left neighbor among sorted
// breakpoints; queries below the smallest breakpoint take the first value.
struct StepSurrogate {
    std::vector<double> breakpoints;  // ascending (ties allowed)
    std::vector<double> values;
    double total_variation_hat = 0.0;  // sum |v_{i+1} - v_i|

    double eval(double s) const;
};

// Sorts train by (score, index), denoises the labels, and packages the fit.
StepSurrogate fit_step_surrogate(const ScoredDataset& train, double lambda);

// Estimation-error term of the denoised fit at level delta, for labels of
// total variation at most V:
//   sqrt((2 t1^2 + 2 t1 sqrt(t1^2 + 4 t2 V) + 4 t2 V) / n),
//   t1 = sqrt(ln(4/delta)/2), t2 = sqrt(n ln(4(n-1)/delta) / 8).
double tvb(std::size_t n_train, double delta, double V);

// Penalty for transferring a bound on the training scores to the score
// population: (V + V_hat) sqrt(ln(2/delta2)/(2n)) + sqrt(ln(2/delta3)/(2n)).
double ptb(double V, double V_hat, std::size_t n_train, double delta2,
           double delta3);

// Fixed-split certificate under a total-variation assumption on the true
// calibration curve. Budget parts: (0) denoising level, (1)+(2) transfer,
// (3) validation Bernstein.
BoundReport certify_tv(const ScoredDataset& train, const ScoredDataset& valid,
                       double V, const DeltaBudget& budget);

}  // namespace calcert
