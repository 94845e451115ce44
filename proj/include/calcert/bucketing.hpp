#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "calcert/dataset.hpp"
#include "calcert/report.hpp"

namespace calcert {

// Equal-width grid of base count B shifted by r/R of one bucket width and
// clipped to [0,1]. Edges are strictly increasing, cover [0,1], and every
// width is at most 1/B (a nonzero shift adds one partial bucket at each end).
struct BucketPartition {
    int base_count = 0;   // B
    int shift_index = 0;  // r in [0, shift_count)
    int shift_count = 1;  // R
    std::vector<double> edges;

    static BucketPartition make(int B, int r, int R);
    std::size_t bucket_count() const { return edges.size() - 1; }
    // Buckets are [e_k, e_{k+1}) except the last, which closes at 1.
    std::size_t bucket_of(double s) const;
};

// Certified bound for one partition at level delta, for an L-Lipschitz
// calibration curve: sum_b (n_b/n) min(1, |mean s - mean y| + bernstein_b
// + L w_b) over non-empty buckets.
double lipschitz_bucket_bound(const ScoredDataset& valid, double L,
                              const BucketPartition& partition, double delta);

// Doubling bucket counts 2, 4, ..., capped at 2^14 and at n/20.
std::vector<int> default_bucket_counts(std::size_t n);

// Minimum of lipschitz_bucket_bound over all (B, r) candidates, each run at
// level delta / (#bucket-counts * shift_count); ties prefer smaller B, then
// smaller r.
BoundReport certify_lipschitz(const ScoredDataset& valid, double L,
                              const std::vector<int>& bucket_counts,
                              int shift_count, double delta);

// Plain calibration-error estimate on B equal-width bins:
// sum_b (n_b/n) |mean s - mean y|. A point estimate, not a bound.
double ece(std::span<const double> scores, std::span<const int> labels, int bins);

}  // namespace calcert
