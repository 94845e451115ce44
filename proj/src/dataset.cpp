#include "calcert/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "calcert/errors.hpp"
#include "calcert/rng.hpp"

namespace calcert {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ValidationError(msg); }

[[noreturn]] void fail_at(const std::string& msg, std::size_t line) {
    fail(msg + " at line " + std::to_string(line));
}

// Full-token parses; trailing junk is an error.
bool parse_double(const std::string& tok, double& out) {
    const char* begin = tok.data();
    const char* end = begin + tok.size();
    auto r = std::from_chars(begin, end, out);
    return r.ec == std::errc() && r.ptr == end;
}

bool parse_int(const std::string& tok, long& out) {
    const char* begin = tok.data();
    const char* end = begin + tok.size();
    auto r = std::from_chars(begin, end, out);
    return r.ec == std::errc() && r.ptr == end;
}

void strip_cr(std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
}

}  // namespace

void ScoredDataset::validate() const {
    if (scores.size() != labels.size()) fail("scores and labels differ in length");
    if (scores.empty()) fail("dataset is empty");
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double s = scores[i];
        if (!(s >= 0.0 && s <= 1.0)) fail("score out of range at index " + std::to_string(i));
        if (labels[i] != 0 && labels[i] != 1) fail("label not in {0,1} at index " + std::to_string(i));
    }
}

ScoredDataset make_dataset(std::vector<double> scores, std::vector<int> labels) {
    ScoredDataset d{std::move(scores), std::move(labels)};
    d.validate();
    return d;
}

ScoredDataset load_dataset(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) fail("empty file");
    strip_cr(line);
    if (line != "score,label") fail("bad header, expected \"score,label\"");

    ScoredDataset d;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (line.empty()) fail_at("empty row", lineno);
        const auto comma = line.find(',');
        if (comma == std::string::npos) fail_at("missing label column", lineno);
        if (line.find(',', comma + 1) != std::string::npos) fail_at("extra column", lineno);

        double score;
        if (!parse_double(line.substr(0, comma), score)) fail_at("malformed score", lineno);
        if (!(score >= 0.0 && score <= 1.0)) fail_at("score out of range", lineno);

        long label;
        if (!parse_int(line.substr(comma + 1), label)) fail_at("malformed label", lineno);
        if (label != 0 && label != 1) fail_at("label not in {0,1}", lineno);

        d.scores.push_back(score);
        d.labels.push_back(static_cast<int>(label));
    }
    if (d.scores.empty()) fail("no data rows");
    return d;
}

ScoredDataset load_dataset_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open input file: " + path);
    return load_dataset(in);
}

void save_dataset(const ScoredDataset& d, std::ostream& out) {
    out << "score,label\n";
    char buf[48];
    for (std::size_t i = 0; i < d.size(); ++i) {
        // 17 significant digits: read-back reproduces the exact double.
        std::snprintf(buf, sizeof buf, "%.17g", d.scores[i]);
        out << buf << ',' << d.labels[i] << '\n';
    }
}

void SplitPlan::validate(std::size_t n) const {
    if (fold_count < 2 || folds.size() != static_cast<std::size_t>(fold_count))
        fail("split plan has wrong fold count");
    std::vector<char> seen(n, 0);
    std::size_t total = 0;
    for (const auto& f : folds) {
        std::vector<char> in_valid(n, 0);
        for (std::size_t i : f.valid) {
            if (i >= n || seen[i]) fail("validation folds do not partition the index set");
            seen[i] = 1;
            in_valid[i] = 1;
        }
        if (f.train.size() + f.valid.size() != n) fail("fold does not cover the index set");
        for (std::size_t i : f.train)
            if (i >= n || in_valid[i]) fail("train/validation overlap within a fold");
        total += f.valid.size();
    }
    if (total != n) fail("validation folds do not cover the index set");
}

SplitPlan make_split_plan(std::size_t n, int k_folds, std::uint64_t seed) {
    if (k_folds < 2) fail("fold count must be at least 2");
    if (n < 2 * static_cast<std::size_t>(k_folds))
        fail("dataset too small for " + std::to_string(k_folds) + " folds");

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(derive_seed(seed, {0x73706c6974ULL}));  // "split"
    shuffle(perm, rng);

    SplitPlan plan;
    plan.fold_count = k_folds;
    plan.seed = seed;
    plan.folds.resize(k_folds);

    const std::size_t base = n / k_folds;
    const std::size_t extra = n % k_folds;
    std::size_t pos = 0;
    for (int k = 0; k < k_folds; ++k) {
        const std::size_t len = base + (static_cast<std::size_t>(k) < extra ? 1 : 0);
        auto& fold = plan.folds[k];
        fold.valid.assign(perm.begin() + pos, perm.begin() + pos + len);
        std::sort(fold.valid.begin(), fold.valid.end());
        pos += len;
    }
    for (int k = 0; k < k_folds; ++k) {
        auto& fold = plan.folds[k];
        fold.train.reserve(n - fold.valid.size());
        std::size_t vi = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (vi < fold.valid.size() && fold.valid[vi] == i) {
                ++vi;
            } else {
                fold.train.push_back(i);
            }
        }
    }
    plan.validate(n);
    return plan;
}

std::size_t subsample_cap(std::size_t n_total) {
    const std::size_t scaled = n_total / 20;  // floor(0.05 n)
    return std::min<std::size_t>(15000, std::max<std::size_t>(5000, scaled));
}

std::vector<std::size_t> subsample_validation(const std::vector<std::size_t>& valid,
                                              std::size_t n_total,
                                              std::uint64_t seed) {
    const std::size_t m = std::min(valid.size(), subsample_cap(n_total));
    std::vector<std::size_t> pool = valid;
    Rng rng(derive_seed(seed, {0x737562ULL}));  // "sub"
    // Partial Fisher-Yates: the first m slots are a uniform sample.
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.next_below(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(m);
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace calcert
