#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "calcert/dataset.hpp"

namespace calcert {

// Synthetic calibration curves with closed-form structure: every family
// exposes its kink locations and exact total variation, so ground-truth CE
// reduces to well-behaved quadrature.
enum class EtaFamily { identity, offset, smooth_wiggle, step, hf_adversarial };

struct EtaSpec {
    EtaFamily family = EtaFamily::identity;
    double c = 0.0;          // offset shift
    double amplitude = 0.0;  // wiggle families
    double frequency = 0.0;  // cycles over [0,1]
    std::vector<double> step_breaks;   // ascending, interior
    std::vector<double> step_values;   // one per segment (breaks + 1)

    static EtaSpec identity();
    static EtaSpec offset(double c);
    // eta(s) = clip(s + A sin(2 pi f s)); smooth_wiggle requires the
    // monotone regime 2 pi f A <= 1, hf_adversarial allows any A, f.
    static EtaSpec smooth_wiggle(double amplitude, double frequency);
    static EtaSpec hf_adversarial(double amplitude, double frequency);
    // Staircase: J jumps at j/(J+1), segment values centered in each cell.
    static EtaSpec staircase(int jumps);
    static EtaSpec step(std::vector<double> breaks, std::vector<double> values);
    // Family defaults by name: identity; offset (c=0.1); smooth-wiggle
    // (A=0.1, f=1); step (J=4); hf-adversarial (A=0.25, F=105).
    static EtaSpec from_name(const std::string& name);

    const char* family_name() const;
    void validate() const;
    double eta(double s) const;

    // Kink candidates of |s - eta(s)| in (0,1): clip/step/sign-change
    // locations that are analytically available (sine zeros and extrema;
    // clip crossings between them are left to adaptive refinement).
    std::vector<double> integrand_breakpoints() const;

    // Exact total variation of eta on [0,1] (sum of monotone-piece swings).
    double total_variation() const;
};

enum class ScoreLaw { uniform, mixture };  // mixture: 0.7 U[0,1] + 0.3 U[0.4,0.6]

ScoreLaw parse_score_law(const std::string& name);
const char* score_law_name(ScoreLaw law);
double score_density(ScoreLaw law, double s);

// s_i from the score law, y_i ~ Bernoulli(eta(s_i)); one derived seed per
// index, so any prefix of a larger sample is reproducible.
ScoredDataset sample_synthetic(const EtaSpec& spec, ScoreLaw law,
                               std::size_t n, std::uint64_t seed);

// E_s |s - eta(s)| by adaptive quadrature between the family's breakpoints;
// absolute error below 1e-8.
double true_ce(const EtaSpec& spec, ScoreLaw law = ScoreLaw::uniform);

// OLS slope of ln(gap) against ln(n). Requires >= 2 points, gaps > 0.
double fit_slope(const std::vector<std::pair<double, double>>& points);

struct RatePoint {
    std::size_t n = 0;
    double mean_gap = 0.0;
    double std_gap = 0.0;  // sample std over repeats (0 for one repeat)
};

struct RateSeries {
    std::string method;
    std::vector<RatePoint> points;
    double slope = 0.0;
};

struct RateTable {
    std::vector<RateSeries> series;
    double true_ce_value = 0.0;
    std::string family;
};

// A benchmarked estimator: maps a dataset and a seed to a bound (or, for
// heuristics flagged absolute_gap, a point estimate whose gap is taken in
// absolute value).
struct BenchMethod {
    std::string name;
    bool absolute_gap = false;
    std::function<double(const ScoredDataset&, std::uint64_t)> run;
};

struct BenchConfig {
    double delta = 0.05;
    int folds = 5;
    double v_assumed = 1.0;
    double h_perturb = 0.015625;
    double lipschitz_L = 2.0;
    int ece_bins = 15;
    int threads = 1;
};

// tv / nw / lipschitz via the cross-fit certifier, plus the plug-in "ece"
// heuristic. Certificates run on the raw synthetic scores (the smooth
// families already satisfy the relevant curvature caps).
std::vector<BenchMethod> standard_bench_methods(
    const std::vector<std::string>& names, const BenchConfig& config);

// Mean/std of (value - true CE) per method and n over seeded repeats, plus
// fitted log-log slopes.
RateTable rate_sweep(const EtaSpec& spec, ScoreLaw law,
                     const std::vector<BenchMethod>& methods,
                     const std::vector<std::size_t>& n_grid, int repeats,
                     std::uint64_t seed, int threads = 1);

// Columns: method,n,mean_gap,std_gap (17 significant digits).
void rate_table_to_csv(const RateTable& table, std::ostream& out);
nlohmann::ordered_json rate_table_to_json(const RateTable& table);

}  // namespace calcert
