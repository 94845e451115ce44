#include "calcert/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include "calcert/errors.hpp"

namespace calcert {

namespace {

double simpson(double fa, double fm, double fb, double h) {
    return h / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)>& f, double a, double b,
             double fa, double fm, double fb, double whole, double tol,
             int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(fa, flm, fm, m - a);
    const double right = simpson(fm, frm, fb, b - m);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol) {
    if (!(b >= a)) throw ValidationError("integration bounds out of order");
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    return adapt(f, a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), abs_tol, 60);
}

double integrate_piecewise(const std::function<double(double)>& f, double a,
                           double b, const std::vector<double>& breakpoints,
                           double abs_tol) {
    if (!(b >= a)) throw ValidationError("integration bounds out of order");
    std::vector<double> cuts{a};
    for (double c : breakpoints)
        if (c > a && c < b) cuts.push_back(c);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const double total = b - a;
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double w = cuts[i + 1] - cuts[i];
        if (w <= 0.0) continue;
        sum += integrate(f, cuts[i], cuts[i + 1],
                         total > 0.0 ? abs_tol * (w / total) : abs_tol);
    }
    return sum;
}

}  // namespace calcert
