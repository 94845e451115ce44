// Python face of the library: the cross-fit certifier plus the synthetic
// and formula-level helpers the smoke tests exercise. Reports cross the
// boundary as JSON strings; the python wrapper turns them into dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "calcert/bucketing.hpp"
#include "calcert/concentration.hpp"
#include "calcert/crossfit.hpp"
#include "calcert/dataset.hpp"
#include "calcert/errors.hpp"
#include "calcert/nw.hpp"
#include "calcert/report.hpp"
#include "calcert/synth.hpp"
#include "calcert/tv.hpp"
#include "calcert/version.hpp"

namespace py = pybind11;

namespace {

std::string certify_json(const std::vector<double>& scores,
                         const std::vector<int>& labels,
                         const std::string& method, double delta,
                         std::uint64_t seed, int folds, bool subsample,
                         double v_assumed, double h, double lipschitz_L,
                         int threads) {
    calcert::CrossfitConfig config;
    config.method = calcert::parse_method(method);
    config.folds = folds;
    config.delta = delta;
    config.seed = seed;
    config.subsample = subsample;
    config.threads = threads;
    config.v_assumed = v_assumed;
    config.h_perturb = h;
    config.lipschitz_L = lipschitz_L;
    const calcert::ScoredDataset data = calcert::make_dataset(scores, labels);
    const calcert::BoundReport report = calcert::certify_crossfit(data, config);
    return calcert::report_to_json(report).dump();
}

std::pair<std::vector<double>, std::vector<int>> synth_sample(
    const std::string& family, std::size_t n, const std::string& law,
    std::uint64_t seed) {
    const calcert::ScoredDataset d = calcert::sample_synthetic(
        calcert::EtaSpec::from_name(family), calcert::parse_score_law(law), n,
        seed);
    return {d.scores, d.labels};
}

double true_ce_by_name(const std::string& family, const std::string& law) {
    return calcert::true_ce(calcert::EtaSpec::from_name(family),
                            calcert::parse_score_law(law));
}

}  // namespace

PYBIND11_MODULE(_calcert, m) {
    m.doc() = "certified L1 calibration-error bounds";
    m.attr("__version__") = calcert::kVersion;

    py::register_exception<calcert::ValidationError>(m, "ValidationError",
                                                     PyExc_ValueError);

    m.def("certify_json", &certify_json, py::arg("scores"), py::arg("labels"),
          py::arg("method"), py::arg("delta") = 0.05, py::arg("seed") = 0,
          py::arg("folds") = 5, py::arg("subsample") = true,
          py::arg("v_assumed") = 1.0, py::arg("h") = 0.015625,
          py::arg("lipschitz_L") = 1.0, py::arg("threads") = 1,
          "Cross-fit certificate; returns the report as a JSON string.");

    m.def(
        "perturb_scores",
        [](const std::vector<double>& scores, double h, std::uint64_t seed) {
            return calcert::perturb_scores(scores, h, seed);
        },
        py::arg("scores"), py::arg("h"), py::arg("seed") = 0);

    m.def("sample_synthetic", &synth_sample, py::arg("family"), py::arg("n"),
          py::arg("law") = "uniform", py::arg("seed") = 0);

    m.def("true_ce", &true_ce_by_name, py::arg("family"),
          py::arg("law") = "uniform");

    m.def(
        "ece",
        [](const std::vector<double>& scores, const std::vector<int>& labels,
           int bins) { return calcert::ece(scores, labels, bins); },
        py::arg("scores"), py::arg("labels"), py::arg("bins") = 15);

    m.def(
        "tv_denoise",
        [](const std::vector<double>& y, double lam) {
            return calcert::tv_denoise(y, lam);
        },
        py::arg("y"), py::arg("lam"));

    m.def("bernstein_bound", &calcert::bernstein_bound, py::arg("n"),
          py::arg("delta"), py::arg("variance"));
    m.def("dkw_bound", &calcert::dkw_bound, py::arg("n"), py::arg("delta"));
    m.def("tv_lambda", &calcert::tv_lambda, py::arg("n_train"),
          py::arg("delta1"));
    m.def("sech_normalizer", &calcert::sech_normalizer, py::arg("s_orig"),
          py::arg("h"));
}
