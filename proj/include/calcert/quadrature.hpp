#pragma once

#include <functional>
#include <vector>

namespace calcert {

// Adaptive Simpson with Richardson acceptance (|S_half - S| <= 15 tol),
// recursion capped at depth 60.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol);

// Splits [a,b] at the interior breakpoints first and spreads the error
// budget proportionally to piece width, so kinks on the list cost nothing.
double integrate_piecewise(const std::function<double(double)>& f, double a,
                           double b, const std::vector<double>& breakpoints,
                           double abs_tol);

}  // namespace calcert
