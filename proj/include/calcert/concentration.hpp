#pragma once

#include <cstddef>
#include <span>

namespace calcert {

// Compensated (Neumaier) summation in index order: the result depends only on
// the sequence, never on threading or chunking.
double stable_sum(std::span<const double> values);
double stable_mean(std::span<const double> values);

// Population-style empirical variance (divisor n) for values in [0,1],
// clamped into [0, 1/4] against roundoff.
double empirical_variance(std::span<const double> values);

// Empirical-Bernstein deviation bound for i.i.d. variables in [0,1]:
//   sqrt(2 sigma2 ln(3/delta) / n) + 3 ln(3/delta) / n.
double bernstein_bound(std::size_t n, double delta, double sigma2_hat);

// Dvoretzky-Kiefer-Wolfowitz sup-CDF deviation: sqrt(ln(2/delta) / (2n)).
double dkw_bound(std::size_t n, double delta);

}  // namespace calcert
