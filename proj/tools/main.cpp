// calcert: certified upper bounds on L1 calibration error, plus the
// synthetic-data and benchmarking harness around them. Data rides on
// standard output; logs ride on standard error.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "calcert/bucketing.hpp"
#include "calcert/crossfit.hpp"
#include "calcert/dataset.hpp"
#include "calcert/errors.hpp"
#include "calcert/nw.hpp"
#include "calcert/parallel.hpp"
#include "calcert/report.hpp"
#include "calcert/synth.hpp"
#include "calcert/version.hpp"

namespace {

using calcert::ValidationError;
using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitArgs = 2;
constexpr int kExitData = 3;

std::string fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

// Reads a whole file ("-" = standard input) so the manifest can digest the
// exact bytes that were parsed.
std::string slurp(const std::string& path) {
    if (path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open \"" + path + "\"");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

calcert::ScoredDataset parse_csv(const std::string& bytes) {
    std::istringstream in(bytes);
    return calcert::load_dataset(in);
}

struct Manifest {
    std::string command;
    ordered_json parameters = ordered_json::object();
    std::optional<std::string> input_digest;
    std::uint64_t seed = 0;
    std::chrono::steady_clock::time_point started =
        std::chrono::steady_clock::now();

    ordered_json finish() const {
        ordered_json j;
        j["command"] = command;
        j["parameters"] = parameters;
        if (input_digest)
            j["input_digest"] = *input_digest;
        else
            j["input_digest"] = nullptr;
        j["seed"] = seed;
        j["version"] = calcert::kVersion;
        j["duration_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          started)
                .count();
        return j;
    }
};

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(csv);
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<std::size_t> parse_counts(const std::string& csv) {
    std::vector<std::size_t> out;
    for (const std::string& tok : split_list(csv)) {
        double v;
        try {
            v = std::stod(tok);
        } catch (const std::exception&) {
            throw CLI::ValidationError("--n", "not a number: " + tok);
        }
        const double r = std::round(v);
        if (!(r >= 1.0 && r <= 1e12 && std::abs(v - r) <= 1e-6 * r))
            throw CLI::ValidationError("--n", "not a positive count: " + tok);
        out.push_back(static_cast<std::size_t>(r));
    }
    if (out.empty()) throw CLI::ValidationError("--n", "empty list");
    return out;
}

void emit(const ordered_json& j) { std::cout << j.dump(2) << "\n"; }

struct CertifyArgs {
    std::string input;
    std::string method;
    double delta = 0.05;
    std::uint64_t seed = 0;
    double v_assumed = 1.0;
    double h = 0.015625;
    double lipschitz_L = 1.0;
    int folds = 5;
    int shifts = 4;
    std::string buckets;  // optional comma list
    bool no_subsample = false;
    int threads = 0;
};

int run_certify(const CertifyArgs& a) {
    Manifest man;
    man.command = "certify";
    man.seed = a.seed;

    calcert::CrossfitConfig config;
    config.method = calcert::parse_method(a.method);  // flag error -> caught as 2
    config.folds = a.folds;
    config.delta = a.delta;
    config.seed = a.seed;
    config.subsample = !a.no_subsample;
    config.threads = calcert::effective_threads(a.threads);
    config.v_assumed = a.v_assumed;
    config.h_perturb = a.h;
    config.lipschitz_L = a.lipschitz_L;
    config.shift_count = a.shifts;
    if (!a.buckets.empty()) {
        for (const std::string& tok : split_list(a.buckets)) {
            try {
                config.bucket_counts.push_back(std::stoi(tok));
            } catch (const std::exception&) {
                throw CLI::ValidationError("--buckets", "not a count: " + tok);
            }
        }
    }

    man.parameters["input"] = a.input;
    man.parameters["method"] = a.method;
    man.parameters["delta"] = a.delta;
    man.parameters["folds"] = a.folds;
    man.parameters["subsample"] = !a.no_subsample;
    man.parameters["threads"] = a.threads;
    if (config.method == calcert::Method::tv)
        man.parameters["V"] = a.v_assumed;
    if (config.method == calcert::Method::nw) man.parameters["h"] = a.h;
    if (config.method == calcert::Method::lipschitz) {
        man.parameters["L"] = a.lipschitz_L;
        man.parameters["shifts"] = a.shifts;
        if (!a.buckets.empty()) man.parameters["buckets"] = a.buckets;
    }

    const std::string bytes = slurp(a.input);
    man.input_digest = fnv1a64(bytes);
    const calcert::ScoredDataset data = parse_csv(bytes);

    const calcert::BoundReport report = calcert::certify_crossfit(data, config);
    ordered_json j = calcert::report_to_json(report);
    j["manifest"] = man.finish();
    emit(j);
    return kExitOk;
}

int run_perturb(const std::string& input, double h, std::uint64_t seed) {
    const std::string bytes = slurp(input);
    const calcert::ScoredDataset data = parse_csv(bytes);
    const std::vector<double> perturbed =
        calcert::perturb_scores(data.scores, h, seed);
    // Same CSV dialect as the loader; labels pass through untouched.
    calcert::ScoredDataset out;
    out.scores = perturbed;
    out.labels = data.labels;
    std::ostringstream ss;
    calcert::save_dataset(out, ss);
    std::cout << ss.str();
    return kExitOk;
}

int run_synth(const std::string& family, const std::string& law_name,
              std::size_t n, std::uint64_t seed, const std::string& out_path) {
    const calcert::EtaSpec spec = calcert::EtaSpec::from_name(family);
    const calcert::ScoreLaw law = calcert::parse_score_law(law_name);
    const calcert::ScoredDataset data =
        calcert::sample_synthetic(spec, law, n, seed);
    std::ostringstream ss;
    calcert::save_dataset(data, ss);
    if (out_path.empty() || out_path == "-") {
        std::cout << ss.str();
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw ValidationError("cannot open \"" + out_path + "\"");
        out << ss.str();
    }
    return kExitOk;
}

struct BenchArgs {
    std::string family = "smooth-wiggle";
    std::string law = "uniform";
    std::string methods = "nw,tv,lipschitz,ece";
    std::string n_list = "1e4,3e4,1e5,3e5,1e6";
    int repeats = 64;
    double delta = 0.05;
    std::uint64_t seed = 0;
    std::string out_path;
    int threads = 0;
    int folds = 5;
    double v_assumed = 1.0;
    double h = 0.015625;
    double lipschitz_L = 2.0;
    int bins = 15;
};

int run_bench(const BenchArgs& a) {
    Manifest man;
    man.command = "bench";
    man.seed = a.seed;
    man.parameters["family"] = a.family;
    man.parameters["law"] = a.law;
    man.parameters["methods"] = a.methods;
    man.parameters["n"] = a.n_list;
    man.parameters["repeats"] = a.repeats;
    man.parameters["delta"] = a.delta;
    man.parameters["folds"] = a.folds;
    man.parameters["V"] = a.v_assumed;
    man.parameters["h"] = a.h;
    man.parameters["L"] = a.lipschitz_L;
    man.parameters["bins"] = a.bins;
    man.parameters["threads"] = a.threads;
    if (!a.out_path.empty()) man.parameters["out"] = a.out_path;

    const std::vector<std::size_t> grid = parse_counts(a.n_list);
    const calcert::EtaSpec spec = calcert::EtaSpec::from_name(a.family);
    const calcert::ScoreLaw law = calcert::parse_score_law(a.law);

    calcert::BenchConfig bc;
    bc.delta = a.delta;
    bc.folds = a.folds;
    bc.v_assumed = a.v_assumed;
    bc.h_perturb = a.h;
    bc.lipschitz_L = a.lipschitz_L;
    bc.ece_bins = a.bins;
    bc.threads = 1;  // parallelism lives at the repeat level
    const std::vector<calcert::BenchMethod> methods =
        calcert::standard_bench_methods(split_list(a.methods), bc);

    const calcert::RateTable table =
        calcert::rate_sweep(spec, law, methods, grid, a.repeats, a.seed,
                            calcert::effective_threads(a.threads));

    if (!a.out_path.empty()) {
        std::ofstream out(a.out_path, std::ios::binary);
        if (!out) throw ValidationError("cannot open \"" + a.out_path + "\"");
        calcert::rate_table_to_csv(table, out);
    }
    ordered_json j = calcert::rate_table_to_json(table);
    j["manifest"] = man.finish();
    emit(j);
    return kExitOk;
}

int run_ece(const std::string& input, int bins) {
    const std::string bytes = slurp(input);
    const calcert::ScoredDataset data = parse_csv(bytes);
    const double value = calcert::ece(data.scores, data.labels, bins);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g\n", value);
    std::cout << buf;
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Certified L1 calibration-error upper bounds"};
    app.set_version_flag("--version", calcert::kVersion);
    app.require_subcommand(1);
    // help stays long-form only: several subcommands take a bandwidth
    // option spelled --h, which would collide with a -h short flag
    app.set_help_flag("--help", "print help");

    CertifyArgs cert;
    CLI::App* c_certify =
        app.add_subcommand("certify", "Certify a bound from a score,label CSV");
    c_certify->add_option("--input", cert.input, "CSV path ('-' = stdin)")
        ->required();
    c_certify->add_option("--method", cert.method, "tv | nw | lipschitz")
        ->required()
        ->check(CLI::IsMember({"tv", "nw", "lipschitz"}));
    c_certify->add_option("--delta", cert.delta, "failure probability")
        ->check(CLI::Range(1e-12, 1.0 - 1e-12));
    c_certify->add_option("--seed", cert.seed, "RNG seed");
    c_certify->add_option("--V", cert.v_assumed,
                          "assumed total variation of the calibration curve (tv)");
    c_certify->add_option("--h", cert.h, "perturbation bandwidth (nw)");
    c_certify->add_option("--L", cert.lipschitz_L,
                          "assumed Lipschitz constant (lipschitz)");
    c_certify->add_option("--folds", cert.folds, "cross-fit folds")
        ->check(CLI::Range(2, 1000));
    c_certify->add_option("--shifts", cert.shifts, "bucket shift count")
        ->check(CLI::Range(1, 64));
    c_certify->add_option("--buckets", cert.buckets,
                          "comma list overriding the bucket-count ladder");
    c_certify->add_flag("--no-subsample", cert.no_subsample,
                        "evaluate on full validation folds");
    c_certify->add_option("--threads", cert.threads, "parallelism cap (0 = auto)");

    std::string pert_input;
    double pert_h = 0.0;
    std::uint64_t pert_seed = 0;
    CLI::App* c_perturb =
        app.add_subcommand("perturb", "Replace scores by sech-kernel draws");
    c_perturb->add_option("--input", pert_input, "CSV path ('-' = stdin)")
        ->required();
    c_perturb->add_option("--h", pert_h, "kernel bandwidth")
        ->required()
        ->check(CLI::PositiveNumber);
    c_perturb->add_option("--seed", pert_seed, "RNG seed");

    std::string synth_family, synth_law = "uniform", synth_out;
    std::size_t synth_n = 0;
    std::uint64_t synth_seed = 0;
    CLI::App* c_synth =
        app.add_subcommand("synth", "Sample a synthetic score,label dataset");
    const std::vector<std::string> kFamilies{
        "identity",      "offset",         "smooth-wiggle", "smooth_wiggle",
        "step",          "hf-adversarial", "hf_adversarial"};
    c_synth
        ->add_option("--family", synth_family,
                     "identity | offset | smooth-wiggle | step | hf-adversarial")
        ->required()
        ->check(CLI::IsMember(kFamilies));
    c_synth->add_option("--law", synth_law, "uniform | mixture")
        ->check(CLI::IsMember({"uniform", "mixture"}));
    c_synth->add_option("--n", synth_n, "sample count")
        ->required()
        ->check(CLI::PositiveNumber);
    c_synth->add_option("--seed", synth_seed, "RNG seed");
    c_synth->add_option("--out", synth_out, "output path (default stdout)");

    BenchArgs bench;
    CLI::App* c_bench = app.add_subcommand(
        "bench", "Gap-vs-n sweep over certifiers and the ece heuristic");
    c_bench->add_option("--family", bench.family, "synthetic family")
        ->check(CLI::IsMember(kFamilies));
    c_bench->add_option("--law", bench.law, "uniform | mixture")
        ->check(CLI::IsMember({"uniform", "mixture"}));
    c_bench->add_option("--methods", bench.methods, "comma list");
    c_bench->add_option("--n", bench.n_list, "comma list of sample counts");
    c_bench->add_option("--repeats", bench.repeats, "repeats per point")
        ->check(CLI::Range(1, 100000));
    c_bench->add_option("--delta", bench.delta, "failure probability")
        ->check(CLI::Range(1e-12, 1.0 - 1e-12));
    c_bench->add_option("--seed", bench.seed, "RNG seed");
    c_bench->add_option("--out", bench.out_path, "rate-table CSV path");
    c_bench->add_option("--threads", bench.threads, "parallelism cap (0 = auto)");
    c_bench->add_option("--folds", bench.folds, "cross-fit folds")
        ->check(CLI::Range(2, 1000));
    c_bench->add_option("--V", bench.v_assumed, "assumed total variation (tv)");
    c_bench->add_option("--h", bench.h, "perturbation bandwidth (nw)")
        ->check(CLI::PositiveNumber);
    c_bench->add_option("--L", bench.lipschitz_L, "Lipschitz constant");
    c_bench->add_option("--bins", bench.bins, "ece bins")
        ->check(CLI::Range(1, 1 << 20));

    std::string ece_input = "-";
    int ece_bins = 15;
    CLI::App* c_ece =
        app.add_subcommand("ece", "Plug-in binned calibration-error heuristic");
    c_ece->add_option("--input", ece_input, "CSV path ('-' = stdin)");
    c_ece->add_option("--bins", ece_bins, "equal-width bins")
        ->check(CLI::Range(1, 1 << 20));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << std::flush;
        return kExitArgs;
    }

    try {
        if (*c_certify) return run_certify(cert);
        if (*c_perturb) return run_perturb(pert_input, pert_h, pert_seed);
        if (*c_synth)
            return run_synth(synth_family, synth_law, synth_n, synth_seed,
                             synth_out);
        if (*c_bench) return run_bench(bench);
        if (*c_ece) return run_ece(ece_input, ece_bins);
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return kExitArgs;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return kExitArgs;  // unreachable with require_subcommand(1)
}
