#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace calcert {

// Scores in [0,1] paired with binary labels. Order is meaningful only as a
// stable identity (splits reference positions); no sortedness is assumed.
struct ScoredDataset {
    std::vector<double> scores;
    std::vector<int> labels;

    std::size_t size() const { return scores.size(); }
    void validate() const;  // throws ValidationError
};

ScoredDataset make_dataset(std::vector<double> scores, std::vector<int> labels);

// CSV with exact header "score,label"; one "score,label" pair per row, no
// extra columns. Parse failures report 1-based line numbers and throw
// ValidationError.
ScoredDataset load_dataset(std::istream& in);
ScoredDataset load_dataset_file(const std::string& path);
void save_dataset(const ScoredDataset& d, std::ostream& out);

// Deterministic K-fold split: a seeded shuffle of 0..n-1 chopped into K
// validation folds whose sizes differ by at most one; each fold's training
// set is the complement. Requires 2 <= K and n >= 2K.
struct SplitPlan {
    struct Fold {
        std::vector<std::size_t> train;
        std::vector<std::size_t> valid;
    };
    int fold_count = 0;
    std::uint64_t seed = 0;
    std::vector<Fold> folds;

    void validate(std::size_t n) const;  // partition + disjointness invariants
};

SplitPlan make_split_plan(std::size_t n, int k_folds, std::uint64_t seed);

// Cap on per-fold validation evaluations: min(15000, max(5000, floor(0.05 n))).
std::size_t subsample_cap(std::size_t n_total);

// Uniform subsample without replacement of `valid`, size min(|valid|, cap),
// returned sorted ascending. Deterministic per seed.
std::vector<std::size_t> subsample_validation(const std::vector<std::size_t>& valid,
                                              std::size_t n_total,
                                              std::uint64_t seed);

}  // namespace calcert
