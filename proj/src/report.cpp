#include "calcert/report.hpp"

#include <cmath>
#include <cstdlib>

#include "calcert/errors.hpp"

namespace calcert {

DeltaBudget::DeltaBudget(double total, std::vector<double> parts)
    : total_(total), parts_(std::move(parts)) {
    if (!(total_ > 0.0 && total_ < 1.0)) throw ValidationError("delta must lie in (0,1)");
    if (parts_.empty()) throw ValidationError("delta budget needs at least one part");
    double sum = 0.0;
    for (double p : parts_) {
        if (!(p > 0.0)) throw ValidationError("every delta part must be positive");
        sum += p;
    }
    if (std::abs(sum - total_) > 1e-12)
        throw ValidationError("delta parts do not sum to the total budget");
}

DeltaBudget DeltaBudget::equal_split(double total, int parts) {
    if (parts < 1) throw ValidationError("delta budget needs at least one part");
    std::vector<double> v(parts, total / parts);
    // Guard the sum invariant against division rounding.
    double sum = 0.0;
    for (int i = 0; i + 1 < parts; ++i) sum += v[i];
    v[parts - 1] = total - sum;
    return DeltaBudget(total, std::move(v));
}

double DeltaBudget::part(int i) const {
    if (i < 0 || i >= part_count()) throw ValidationError("delta part index out of range");
    return parts_[i];
}

void BoundReport::validate() const {
    if (method.empty()) throw ValidationError("report method is empty");
    if (n_valid == 0) throw ValidationError("report has no validation points");
    if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("report delta out of range");
    double sum = 0.0;
    for (const auto& [name, value] : terms) {
        if (!std::isfinite(value)) throw ValidationError("non-finite term: " + name);
        sum += value;
    }
    if (std::abs(sum - bound) > 1e-10)
        throw ValidationError("bound does not equal the sum of its terms");
    if (!(bound >= 0.0 && bound <= 1.0)) throw ValidationError("bound outside [0,1]");
}

void finalize_bound(BoundReport& report) {
    double sum = 0.0;
    for (const auto& [name, value] : report.terms) {
        if (!std::isfinite(value)) throw ValidationError("non-finite term: " + name);
        sum += value;
    }
    double clamped = sum;
    if (clamped > 1.0) clamped = 1.0;
    if (clamped < 0.0) clamped = 0.0;
    if (clamped != sum) report.terms["clamp"] = clamped - sum;
    report.bound = clamped;
    report.validate();
}

nlohmann::ordered_json report_to_json(const BoundReport& report) {
    nlohmann::ordered_json j;
    j["method"] = report.method;
    j["n_train"] = report.n_train;
    j["n_valid"] = report.n_valid;
    j["delta"] = report.delta;
    j["bound"] = report.bound;
    j["seed"] = report.seed;
    j["terms"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : report.terms) j["terms"][k] = v;
    j["details"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : report.details) j["details"][k] = v;
    if (!report.fold_details.empty()) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& fold : report.fold_details) {
            nlohmann::ordered_json f = nlohmann::ordered_json::object();
            for (const auto& [k, v] : fold) f[k] = v;
            arr.push_back(std::move(f));
        }
        j["fold_details"] = std::move(arr);
    }
    return j;
}

}  // namespace calcert
