#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "calcert/dataset.hpp"
#include "calcert/report.hpp"

namespace calcert {

enum class Method { tv, nw, lipschitz };

const char* method_name(Method m);
Method parse_method(const std::string& name);  // throws ValidationError

struct CrossfitConfig {
    int folds = 5;
    Method method = Method::nw;
    double delta = 0.05;
    std::uint64_t seed = 0;
    bool subsample = true;
    int threads = 1;

    // tv
    double v_assumed = 1.0;

    // nw
    double h_perturb = 0.015625;
    std::optional<double> h_smooth;  // default: plug-in rule

    // lipschitz
    double lipschitz_L = 1.0;
    std::vector<int> bucket_counts;  // empty -> default_bucket_counts(n)
    int shift_count = 4;
};

// K-fold certificate: each fold's surrogate is fit on the complement, the
// per-point validation quantities are pooled across folds, and the
// concentration step runs once on the pool at the full sub-delta budget.
// Fit-accuracy terms (tvb/ptb, envelope R) are averaged with pooled-count
// weights. The classical guarantee is stated for one fixed split; pooling
// is flagged in details.pooled_folds_caveat. The lipschitz method fits
// nothing, so it runs on the full dataset with no split.
BoundReport certify_crossfit(const ScoredDataset& data,
                             const CrossfitConfig& config);

// Same, with a caller-supplied plan (tv/nw only; for tests).
BoundReport certify_crossfit_with_plan(const ScoredDataset& data,
                                       const CrossfitConfig& config,
                                       const SplitPlan& plan);

}  // namespace calcert
