#include "calcert/concentration.hpp"

#include <cmath>

#include "calcert/errors.hpp"

namespace calcert {

double stable_sum(std::span<const double> values) {
    double sum = 0.0, comp = 0.0;
    for (double x : values) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    return sum + comp;
}

double stable_mean(std::span<const double> values) {
    if (values.empty()) throw ValidationError("mean of empty sequence");
    return stable_sum(values) / static_cast<double>(values.size());
}

double empirical_variance(std::span<const double> values) {
    if (values.empty()) throw ValidationError("variance of empty sequence");
    const double mean = stable_mean(values);
    double sum = 0.0, comp = 0.0;
    for (double x : values) {
        const double d = (x - mean) * (x - mean);
        const double t = sum + d;
        comp += (std::abs(sum) >= d) ? (sum - t) + d : (d - t) + sum;
        sum = t;
    }
    double var = (sum + comp) / static_cast<double>(values.size());
    if (var < 0.0) var = 0.0;
    if (var > 0.25) var = 0.25;  // attainable max for [0,1] data
    return var;
}

double bernstein_bound(std::size_t n, double delta, double sigma2_hat) {
    if (n < 1) throw ValidationError("bernstein_bound requires n >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0,1)");
    if (!(sigma2_hat >= 0.0 && sigma2_hat <= 0.25))
        throw ValidationError("sigma2_hat must lie in [0, 1/4]");
    const double nd = static_cast<double>(n);
    const double l = std::log(3.0 / delta);
    return std::sqrt(2.0 * sigma2_hat * l / nd) + 3.0 * l / nd;
}

double dkw_bound(std::size_t n, double delta) {
    if (n < 1) throw ValidationError("dkw_bound requires n >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0,1)");
    return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(n)));
}

}  // namespace calcert
