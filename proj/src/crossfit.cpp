#include "calcert/crossfit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "calcert/bucketing.hpp"
#include "calcert/concentration.hpp"
#include "calcert/errors.hpp"
#include "calcert/nw.hpp"
#include "calcert/parallel.hpp"
#include "calcert/rng.hpp"
#include "calcert/tv.hpp"

namespace calcert {

const char* method_name(Method m) {
    switch (m) {
        case Method::tv: return "tv";
        case Method::nw: return "nw";
        case Method::lipschitz: return "lipschitz";
    }
    throw std::logic_error("unreachable");
}

Method parse_method(const std::string& name) {
    if (name == "tv") return Method::tv;
    if (name == "nw") return Method::nw;
    if (name == "lipschitz") return Method::lipschitz;
    throw ValidationError("unknown method \"" + name + "\"");
}

namespace {

constexpr std::uint64_t kSubsampleTag = 0x737562;  // "sub"

ScoredDataset gather(const ScoredDataset& data,
                     const std::vector<std::size_t>& idx) {
    ScoredDataset out;
    out.scores.reserve(idx.size());
    out.labels.reserve(idx.size());
    for (std::size_t i : idx) {
        out.scores.push_back(data.scores[i]);
        out.labels.push_back(data.labels[i]);
    }
    return out;
}

struct FoldOut {
    std::size_t train_size = 0;
    std::size_t valid_size = 0;  // after any subsampling
    std::vector<double> resid;
    // tv
    double lambda = 0.0, v_hat = 0.0, tvb_term = 0.0, ptb_term = 0.0;
    // nw
    std::vector<double> scaled;
    double envelope = 0.0, h_smooth = 0.0;
    std::size_t fallbacks = 0;
};

BoundReport pooled_certificate(const ScoredDataset& data,
                               const CrossfitConfig& config,
                               const SplitPlan& plan) {
    data.validate();
    if (config.method == Method::lipschitz)
        throw ValidationError("lipschitz certificates do not use folds");
    if (!(config.delta > 0.0 && config.delta < 1.0))
        throw ValidationError("delta must lie in (0,1)");

    const DeltaBudget budget = DeltaBudget::equal_split(
        config.delta, config.method == Method::tv ? 4 : 2);
    const std::size_t K = plan.folds.size();

    std::vector<FoldOut> folds(K);
    parallel_for(K, config.threads, [&](std::size_t k) {
        const ScoredDataset train = gather(data, plan.folds[k].train);
        std::vector<std::size_t> vidx = plan.folds[k].valid;
        if (config.subsample)
            vidx = subsample_validation(vidx, data.size(),
                                        derive_seed(config.seed, {kSubsampleTag, k}));
        const ScoredDataset valid = gather(data, vidx);

        FoldOut& out = folds[k];
        out.train_size = train.size();
        out.valid_size = valid.size();
        out.resid.resize(valid.size());

        if (config.method == Method::tv) {
            out.lambda = tv_lambda(train.size(), budget.part(0));
            const StepSurrogate surr = fit_step_surrogate(train, out.lambda);
            for (std::size_t i = 0; i < valid.size(); ++i)
                out.resid[i] =
                    std::abs(valid.scores[i] - surr.eval(valid.scores[i]));
            out.v_hat = surr.total_variation_hat;
            out.tvb_term = tvb(train.size(), budget.part(0), config.v_assumed);
            out.ptb_term = ptb(config.v_assumed, surr.total_variation_hat,
                               train.size(), budget.part(1), budget.part(2));
        } else {
            const NwSurrogate surr(train, config.h_perturb, config.h_smooth);
            const double R = surr.envelope();
            out.scaled.resize(valid.size());
            for (std::size_t i = 0; i < valid.size(); ++i) {
                const auto e = surr.evaluate(valid.scores[i]);
                out.resid[i] = std::abs(e.value - valid.scores[i]);
                if (e.fallback) {
                    ++out.fallbacks;
                    out.scaled[i] = 1.0;
                } else {
                    if (e.g > R * (1.0 + 1e-12))
                        throw std::logic_error(
                            "smoothing proxy exceeded its envelope");
                    out.scaled[i] = std::min(e.g / R, 1.0);
                }
            }
            out.envelope = R;
            out.h_smooth = surr.h_smooth();
        }
    });

    std::size_t pooled = 0, min_train = data.size();
    for (const FoldOut& f : folds) {
        pooled += f.valid_size;
        min_train = std::min(min_train, f.train_size);
    }

    std::vector<double> resid;
    resid.reserve(pooled);
    for (const FoldOut& f : folds)
        resid.insert(resid.end(), f.resid.begin(), f.resid.end());

    BoundReport report;
    report.method = method_name(config.method);
    report.n_train = min_train;
    report.n_valid = pooled;
    report.delta = config.delta;
    report.seed = config.seed;
    report.terms["empirical"] = stable_mean(resid);

    auto weighted = [&](auto pick) {
        std::vector<double> parts(K);
        for (std::size_t k = 0; k < K; ++k)
            parts[k] = (static_cast<double>(folds[k].valid_size) / pooled) *
                       pick(folds[k]);
        return stable_sum(parts);
    };

    if (config.method == Method::tv) {
        report.terms["bernstein"] =
            bernstein_bound(pooled, budget.part(3), empirical_variance(resid));
        report.terms["tvb"] = weighted([](const FoldOut& f) { return f.tvb_term; });
        report.terms["ptb"] = weighted([](const FoldOut& f) { return f.ptb_term; });
        report.details["lambda"] = weighted([](const FoldOut& f) { return f.lambda; });
        report.details["v_assumed"] = config.v_assumed;
        report.details["v_hat"] = weighted([](const FoldOut& f) { return f.v_hat; });
    } else {
        std::vector<double> scaled;
        scaled.reserve(pooled);
        for (const FoldOut& f : folds)
            scaled.insert(scaled.end(), f.scaled.begin(), f.scaled.end());
        const double R = weighted([](const FoldOut& f) { return f.envelope; });
        std::size_t fallbacks = 0;
        for (const FoldOut& f : folds) fallbacks += f.fallbacks;

        report.terms["smoothing"] = R * stable_mean(scaled);
        report.terms["bernstein_residual"] =
            bernstein_bound(pooled, budget.part(0), empirical_variance(resid));
        report.terms["bernstein_smoothing"] =
            R * bernstein_bound(pooled, budget.part(1), empirical_variance(scaled));
        const DerivativeBounds db = derivative_bounds(config.h_perturb);
        report.details["b1"] = db.b1;
        report.details["b2"] = db.b2;
        report.details["h_perturb"] = config.h_perturb;
        report.details["h_smooth"] = weighted([](const FoldOut& f) { return f.h_smooth; });
        report.details["envelope"] = R;
        report.details["tau"] = NwSurrogate::kTau;
        report.details["fallback_count"] = static_cast<double>(fallbacks);
    }

    report.details["folds"] = static_cast<double>(K);
    report.details["subsample"] = config.subsample ? 1.0 : 0.0;
    report.details["pooled_folds_caveat"] = 1.0;

    for (std::size_t k = 0; k < K; ++k) {
        const FoldOut& f = folds[k];
        std::map<std::string, double> row;
        row["fold"] = static_cast<double>(k);
        row["train_size"] = static_cast<double>(f.train_size);
        row["valid_size"] = static_cast<double>(f.valid_size);
        if (config.method == Method::tv) {
            row["lambda"] = f.lambda;
            row["v_hat"] = f.v_hat;
            row["tvb"] = f.tvb_term;
            row["ptb"] = f.ptb_term;
        } else {
            row["envelope"] = f.envelope;
            row["h_smooth"] = f.h_smooth;
            row["fallback_count"] = static_cast<double>(f.fallbacks);
        }
        report.fold_details.push_back(std::move(row));
    }

    finalize_bound(report);
    return report;
}

}  // namespace

BoundReport certify_crossfit(const ScoredDataset& data,
                             const CrossfitConfig& config) {
    data.validate();
    if (config.folds < 2) throw ValidationError("fold count must be at least 2");

    if (config.method == Method::lipschitz) {
        // No surrogate is fit, so there is nothing to leak: use every point.
        std::vector<int> counts = config.bucket_counts;
        if (counts.empty()) counts = default_bucket_counts(data.size());
        BoundReport report = certify_lipschitz(data, config.lipschitz_L, counts,
                                               config.shift_count, config.delta);
        report.seed = config.seed;
        return report;
    }

    const SplitPlan plan =
        make_split_plan(data.size(), config.folds, config.seed);
    return pooled_certificate(data, config, plan);
}

BoundReport certify_crossfit_with_plan(const ScoredDataset& data,
                                       const CrossfitConfig& config,
                                       const SplitPlan& plan) {
    plan.validate(data.size());
    return pooled_certificate(data, config, plan);
}

}  // namespace calcert
