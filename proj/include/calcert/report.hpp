#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace calcert {

// Failure-probability budget of a certificate, split into the sub-deltas the
// method consumes. All parts are positive and sum to the total within 1e-12.
class DeltaBudget {
public:
    DeltaBudget(double total, std::vector<double> parts);
    static DeltaBudget equal_split(double total, int parts);

    double total() const { return total_; }
    int part_count() const { return static_cast<int>(parts_.size()); }
    double part(int i) const;

private:
    double total_;
    std::vector<double> parts_;
};

// One certificate. `terms` holds the additive components: bound ==
// sum(terms) to 1e-10 (a "clamp" entry absorbs the [0,1] clamp when it
// fires). Non-additive diagnostics (bandwidths, envelope, V-hat, winner
// bucket count, ...) live in `details`; per-fold diagnostics in
// `fold_details`.
struct BoundReport {
    std::string method;
    std::size_t n_train = 0;
    std::size_t n_valid = 0;
    double delta = 0.0;
    double bound = 0.0;
    std::uint64_t seed = 0;
    std::map<std::string, double> terms;
    std::map<std::string, double> details;
    std::vector<std::map<std::string, double>> fold_details;

    void validate() const;  // throws ValidationError on broken invariants
};

// Sets report.bound = clamp(sum(terms), 0, 1), recording any clamp as an
// extra term, then validates.
void finalize_bound(BoundReport& report);

nlohmann::ordered_json report_to_json(const BoundReport& report);

}  // namespace calcert
