#include "calcert/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "calcert/bucketing.hpp"
#include "calcert/concentration.hpp"
#include "calcert/crossfit.hpp"
#include "calcert/errors.hpp"
#include "calcert/parallel.hpp"
#include "calcert/quadrature.hpp"
#include "calcert/rng.hpp"

namespace calcert {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double clip01(double x) { return std::clamp(x, 0.0, 1.0); }

// Interior extrema of s + A sin(2 pi f s): cos(2 pi f s) = -1/(2 pi f A).
std::vector<double> wiggle_extrema(double A, double f) {
    std::vector<double> out;
    const double w = kTwoPi * f;
    if (A <= 0.0 || w * A <= 1.0) return out;  // monotone
    const double base = std::acos(-1.0 / (w * A));  // in (pi/2, pi)
    for (int k = 0;; ++k) {
        const double lo = (kTwoPi * k + base) / w;
        const double hi = (kTwoPi * (k + 1) - base) / w;
        if (lo >= 1.0) break;
        if (lo > 0.0) out.push_back(lo);
        if (hi > 0.0 && hi < 1.0) out.push_back(hi);
    }
    return out;
}

}  // namespace

EtaSpec EtaSpec::identity() {
    EtaSpec s;
    s.family = EtaFamily::identity;
    return s;
}

EtaSpec EtaSpec::offset(double c) {
    EtaSpec s;
    s.family = EtaFamily::offset;
    s.c = c;
    s.validate();
    return s;
}

EtaSpec EtaSpec::smooth_wiggle(double amplitude, double frequency) {
    EtaSpec s;
    s.family = EtaFamily::smooth_wiggle;
    s.amplitude = amplitude;
    s.frequency = frequency;
    s.validate();
    return s;
}

EtaSpec EtaSpec::hf_adversarial(double amplitude, double frequency) {
    EtaSpec s;
    s.family = EtaFamily::hf_adversarial;
    s.amplitude = amplitude;
    s.frequency = frequency;
    s.validate();
    return s;
}

EtaSpec EtaSpec::staircase(int jumps) {
    if (jumps < 1) throw ValidationError("staircase needs at least one jump");
    EtaSpec s;
    s.family = EtaFamily::step;
    const int cells = jumps + 1;
    for (int j = 1; j <= jumps; ++j)
        s.step_breaks.push_back(static_cast<double>(j) / cells);
    for (int j = 0; j < cells; ++j)
        s.step_values.push_back((j + 0.5) / cells);
    return s;
}

EtaSpec EtaSpec::step(std::vector<double> breaks, std::vector<double> values) {
    EtaSpec s;
    s.family = EtaFamily::step;
    s.step_breaks = std::move(breaks);
    s.step_values = std::move(values);
    s.validate();
    return s;
}

EtaSpec EtaSpec::from_name(const std::string& name) {
    std::string key = name;
    std::replace(key.begin(), key.end(), '_', '-');
    if (key == "identity") return identity();
    if (key == "offset") return offset(0.1);
    if (key == "smooth-wiggle") return smooth_wiggle(0.1, 1.0);
    if (key == "step") return staircase(4);
    if (key == "hf-adversarial") return hf_adversarial(0.25, 105.0);
    throw ValidationError("unknown family \"" + name + "\"");
}

const char* EtaSpec::family_name() const {
    switch (family) {
        case EtaFamily::identity: return "identity";
        case EtaFamily::offset: return "offset";
        case EtaFamily::smooth_wiggle: return "smooth-wiggle";
        case EtaFamily::step: return "step";
        case EtaFamily::hf_adversarial: return "hf-adversarial";
    }
    throw std::logic_error("unreachable");
}

void EtaSpec::validate() const {
    switch (family) {
        case EtaFamily::identity:
            break;
        case EtaFamily::offset:
            // |c| >= 1 clips to a constant curve: no longer an offset
            if (!(std::abs(c) < 1.0))
                throw ValidationError("offset requires |c| < 1");
            break;
        case EtaFamily::smooth_wiggle:
            if (!(amplitude >= 0.0 && frequency > 0.0))
                throw ValidationError("wiggle needs A >= 0 and f > 0");
            if (kTwoPi * frequency * amplitude > 1.0 + 1e-12)
                throw ValidationError(
                    "smooth-wiggle requires the monotone regime 2 pi f A <= 1");
            break;
        case EtaFamily::hf_adversarial:
            if (!(amplitude >= 0.0 && frequency > 0.0))
                throw ValidationError("wiggle needs A >= 0 and f > 0");
            break;
        case EtaFamily::step: {
            if (step_values.size() != step_breaks.size() + 1)
                throw ValidationError("step needs one value per segment");
            double prev = 0.0;
            for (double b : step_breaks) {
                if (!(b > prev && b < 1.0))
                    throw ValidationError("step breaks must ascend inside (0,1)");
                prev = b;
            }
            for (double v : step_values)
                if (!(v >= 0.0 && v <= 1.0))
                    throw ValidationError("step values must lie in [0,1]");
            break;
        }
    }
}

double EtaSpec::eta(double s) const {
    switch (family) {
        case EtaFamily::identity:
            return s;
        case EtaFamily::offset:
            return clip01(s + c);
        case EtaFamily::smooth_wiggle:
        case EtaFamily::hf_adversarial:
            return clip01(s + amplitude * std::sin(kTwoPi * frequency * s));
        case EtaFamily::step: {
            const auto it =
                std::upper_bound(step_breaks.begin(), step_breaks.end(), s);
            return step_values[static_cast<std::size_t>(it - step_breaks.begin())];
        }
    }
    throw std::logic_error("unreachable");
}

std::vector<double> EtaSpec::integrand_breakpoints() const {
    std::vector<double> out;
    switch (family) {
        case EtaFamily::identity:
            break;
        case EtaFamily::offset:
            if (c > 0.0 && c < 1.0) out.push_back(1.0 - c);
            if (c < 0.0 && c > -1.0) out.push_back(-c);
            break;
        case EtaFamily::smooth_wiggle:
        case EtaFamily::hf_adversarial: {
            const int half_periods = static_cast<int>(std::ceil(2.0 * frequency));
            for (int j = 1; j < half_periods; ++j) {
                const double z = j / (2.0 * frequency);
                if (z > 0.0 && z < 1.0) out.push_back(z);
            }
            for (double m : wiggle_extrema(amplitude, frequency)) out.push_back(m);
            break;
        }
        case EtaFamily::step:
            out = step_breaks;
            for (double v : step_values)
                if (v > 0.0 && v < 1.0) out.push_back(v);
            break;
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double EtaSpec::total_variation() const {
    switch (family) {
        case EtaFamily::identity:
            return 1.0;
        case EtaFamily::offset:
            return std::max(0.0, 1.0 - std::abs(c));
        case EtaFamily::smooth_wiggle:
        case EtaFamily::hf_adversarial: {
            // Sum of swings over the monotone pieces between extrema; the
            // clip is monotone, so it never adds variation of its own.
            std::vector<double> knots = wiggle_extrema(amplitude, frequency);
            knots.insert(knots.begin(), 0.0);
            knots.push_back(1.0);
            double tv = 0.0;
            for (std::size_t i = 0; i + 1 < knots.size(); ++i)
                tv += std::abs(eta(knots[i + 1]) - eta(knots[i]));
            return tv;
        }
        case EtaFamily::step: {
            double tv = 0.0;
            for (std::size_t j = 0; j + 1 < step_values.size(); ++j)
                tv += std::abs(step_values[j + 1] - step_values[j]);
            return tv;
        }
    }
    throw std::logic_error("unreachable");
}

ScoreLaw parse_score_law(const std::string& name) {
    if (name == "uniform") return ScoreLaw::uniform;
    if (name == "mixture") return ScoreLaw::mixture;
    throw ValidationError("unknown score law \"" + name + "\"");
}

const char* score_law_name(ScoreLaw law) {
    return law == ScoreLaw::uniform ? "uniform" : "mixture";
}

double score_density(ScoreLaw law, double s) {
    if (!(s >= 0.0 && s <= 1.0)) return 0.0;
    if (law == ScoreLaw::uniform) return 1.0;
    return 0.7 + (s >= 0.4 && s <= 0.6 ? 0.3 / 0.2 : 0.0);
}

ScoredDataset sample_synthetic(const EtaSpec& spec, ScoreLaw law,
                               std::size_t n, std::uint64_t seed) {
    if (n < 1) throw ValidationError("need at least one sample");
    spec.validate();
    ScoredDataset out;
    out.scores.resize(n);
    out.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, {i}));
        double s;
        if (law == ScoreLaw::uniform) {
            s = rng.next_uniform();
        } else {
            const double pick = rng.next_uniform();
            s = pick < 0.7 ? rng.next_uniform()
                           : 0.4 + 0.2 * rng.next_uniform();
        }
        out.scores[i] = s;
        out.labels[i] = rng.next_uniform() < spec.eta(s) ? 1 : 0;
    }
    return out;
}

double true_ce(const EtaSpec& spec, ScoreLaw law) {
    spec.validate();
    std::vector<double> cuts = spec.integrand_breakpoints();
    if (law == ScoreLaw::mixture) {
        cuts.push_back(0.4);
        cuts.push_back(0.6);
    }
    const auto f = [&](double s) {
        return std::abs(s - spec.eta(s)) * score_density(law, s);
    };
    return integrate_piecewise(f, 0.0, 1.0, cuts, 1e-10);
}

double fit_slope(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 2) throw ValidationError("slope needs at least 2 points");
    std::vector<double> xs, ys;
    for (const auto& [n, gap] : points) {
        if (!(n > 0.0)) throw ValidationError("nonpositive sample count");
        if (!(gap > 0.0)) throw ValidationError("nonpositive gap");
        xs.push_back(std::log(n));
        ys.push_back(std::log(gap));
    }
    const double xbar = stable_mean(xs), ybar = stable_mean(ys);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - xbar) * (ys[i] - ybar);
        sxx += (xs[i] - xbar) * (xs[i] - xbar);
    }
    if (sxx == 0.0) throw ValidationError("sample counts must not be constant");
    return sxy / sxx;
}

std::vector<BenchMethod> standard_bench_methods(
    const std::vector<std::string>& names, const BenchConfig& config) {
    std::vector<BenchMethod> out;
    for (const std::string& name : names) {
        BenchMethod m;
        m.name = name;
        if (name == "ece") {
            m.absolute_gap = true;
            const int bins = config.ece_bins;
            m.run = [bins](const ScoredDataset& d, std::uint64_t) {
                return ece(d.scores, d.labels, bins);
            };
        } else {
            CrossfitConfig cc;
            cc.method = parse_method(name);
            cc.folds = config.folds;
            cc.delta = config.delta;
            cc.v_assumed = config.v_assumed;
            cc.h_perturb = config.h_perturb;
            cc.lipschitz_L = config.lipschitz_L;
            cc.threads = config.threads;
            m.run = [cc](const ScoredDataset& d, std::uint64_t seed) {
                CrossfitConfig local = cc;
                local.seed = seed;
                return certify_crossfit(d, local).bound;
            };
        }
        out.push_back(std::move(m));
    }
    return out;
}

namespace {

constexpr std::uint64_t kDataTag = 0x64617461;    // "data"
constexpr std::uint64_t kMethodTag = 0x6d657468;  // "meth"

}  // namespace

RateTable rate_sweep(const EtaSpec& spec, ScoreLaw law,
                     const std::vector<BenchMethod>& methods,
                     const std::vector<std::size_t>& n_grid, int repeats,
                     std::uint64_t seed, int threads) {
    spec.validate();
    if (methods.empty()) throw ValidationError("no methods to benchmark");
    if (repeats < 1) throw ValidationError("repeats must be positive");
    for (std::size_t i = 0; i + 1 < n_grid.size(); ++i)
        if (!(n_grid[i] < n_grid[i + 1]))
            throw ValidationError("sample grid must strictly increase");
    if (n_grid.empty()) throw ValidationError("empty sample grid");

    const double tce = true_ce(spec, law);
    const std::size_t jobs = n_grid.size() * static_cast<std::size_t>(repeats);
    // values[method][n-index * repeats + rep]
    std::vector<std::vector<double>> values(
        methods.size(), std::vector<double>(jobs, 0.0));

    // One dataset per (n, repeat), shared by all methods so their gaps are
    // directly comparable on common draws.
    parallel_for(jobs, threads, [&](std::size_t job) {
        const std::size_t ni = job / repeats;
        const std::size_t rep = job % repeats;
        const ScoredDataset data = sample_synthetic(
            spec, law, n_grid[ni], derive_seed(seed, {kDataTag, ni, rep}));
        for (std::size_t mi = 0; mi < methods.size(); ++mi)
            values[mi][job] = methods[mi].run(
                data, derive_seed(seed, {kMethodTag, mi, ni, rep}));
    });

    RateTable table;
    table.family = spec.family_name();
    table.true_ce_value = tce;
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        RateSeries series;
        series.method = methods[mi].name;
        std::vector<std::pair<double, double>> slope_points;
        for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
            std::vector<double> gaps(repeats);
            for (int rep = 0; rep < repeats; ++rep) {
                const double v = values[mi][ni * repeats + rep];
                gaps[rep] = methods[mi].absolute_gap ? std::abs(v - tce) : v - tce;
            }
            RatePoint pt;
            pt.n = n_grid[ni];
            pt.mean_gap = stable_mean(gaps);
            if (repeats > 1) {
                double ss = 0.0;
                for (double g : gaps) ss += (g - pt.mean_gap) * (g - pt.mean_gap);
                pt.std_gap = std::sqrt(ss / (repeats - 1));
            }
            series.points.push_back(pt);
            slope_points.emplace_back(static_cast<double>(pt.n), pt.mean_gap);
        }
        series.slope = fit_slope(slope_points);
        table.series.push_back(std::move(series));
    }
    return table;
}

void rate_table_to_csv(const RateTable& table, std::ostream& out) {
    out << "method,n,mean_gap,std_gap\n";
    char buf[64];
    for (const RateSeries& s : table.series) {
        for (const RatePoint& p : s.points) {
            out << s.method << ',' << p.n;
            std::snprintf(buf, sizeof buf, ",%.17g", p.mean_gap);
            out << buf;
            std::snprintf(buf, sizeof buf, ",%.17g", p.std_gap);
            out << buf << '\n';
        }
    }
}

nlohmann::ordered_json rate_table_to_json(const RateTable& table) {
    nlohmann::ordered_json j;
    j["family"] = table.family;
    j["true_ce"] = table.true_ce_value;
    j["series"] = nlohmann::ordered_json::array();
    for (const RateSeries& s : table.series) {
        nlohmann::ordered_json js;
        js["method"] = s.method;
        js["slope"] = s.slope;
        js["points"] = nlohmann::ordered_json::array();
        for (const RatePoint& p : s.points) {
            nlohmann::ordered_json jp;
            jp["n"] = p.n;
            jp["mean_gap"] = p.mean_gap;
            jp["std_gap"] = p.std_gap;
            js["points"].push_back(jp);
        }
        j["series"].push_back(js);
    }
    return j;
}

}  // namespace calcert
