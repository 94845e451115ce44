// End-to-end tests of the command-line binary: exit codes, stream discipline
// (data on stdout, diagnostics on stderr), manifests, and determinism.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "doctest.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

fs::path scratch_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() /
                     ("calcert_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary);
    out << bytes;
}

CliResult run_cli(const std::string& args, const std::string& stdin_data = "",
                  bool use_stdin = false) {
    static int counter = 0;
    const fs::path base = scratch_dir() / ("run" + std::to_string(counter++));
    const fs::path out = base.string() + ".out";
    const fs::path err = base.string() + ".err";
    const fs::path in = base.string() + ".in";

    std::string cmd = std::string(CALCERT_CLI_PATH) + " " + args + " > " +
                      out.string() + " 2> " + err.string();
    if (use_stdin) {
        write_file(in, stdin_data);
        cmd += " < " + in.string();
    } else {
        cmd += " < /dev/null";
    }
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file(out);
    r.err = read_file(err);
    return r;
}

json strip_duration(json j) {
    if (j.contains("manifest")) j["manifest"]["duration_seconds"] = 0.0;
    return j;
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("version flag") {
    auto r = run_cli("--version");
    CHECK(r.code == 0);
    CHECK(r.out.find("0.1.0") != std::string::npos);
}

TEST_CASE("argument errors exit with 2") {
    CHECK(run_cli("").code == 2);  // a subcommand is required
    CHECK(run_cli("frobnicate").code == 2);
    CHECK(run_cli("certify --input x.csv --method knn").code == 2);
    CHECK(run_cli("certify --input x.csv --method nw --delta 1.5").code == 2);
    CHECK(run_cli("certify --input x.csv --method nw --folds 1").code == 2);
    CHECK(run_cli("synth --family bogus --n 10").code == 2);
    CHECK(run_cli("synth --family identity --n 0").code == 2);
    CHECK(run_cli("synth --family identity --n 10 --law beta").code == 2);
    CHECK(run_cli("perturb --input x.csv").code == 2);  // --h is required
    CHECK(run_cli("ece --input x.csv --bins 0").code == 2);
    CHECK(run_cli("bench --repeats 0").code == 2);
    // bad numbers inside comma lists are argument errors, not data errors
    const fs::path d = scratch_dir() / "tiny.csv";
    write_file(d, "score,label\n0.5,1\n0.6,0\n0.4,1\n0.5,0\n");
    CHECK(run_cli("certify --input " + d.string() +
                  " --method lipschitz --buckets 2,oops")
              .code == 2);
}

TEST_CASE("data errors exit with 3 and keep stdout clean") {
    auto missing = run_cli("certify --input /nonexistent.csv --method nw");
    CHECK(missing.code == 3);
    CHECK(missing.out.empty());
    CHECK(!missing.err.empty());

    const fs::path bad = scratch_dir() / "bad.csv";
    write_file(bad, "score,label\n1.7,1\n");
    auto r = run_cli("certify --input " + bad.string() + " --method nw");
    CHECK(r.code == 3);
    CHECK(r.out.empty());

    const fs::path header = scratch_dir() / "hdr.csv";
    write_file(header, "s,y\n0.5,1\n");
    CHECK(run_cli("ece --input " + header.string()).code == 3);
}

TEST_CASE("synth emits a loadable, repeatable dataset") {
    const fs::path f1 = scratch_dir() / "s1.csv";
    const fs::path f2 = scratch_dir() / "s2.csv";
    auto r1 = run_cli("synth --family step --n 500 --seed 7 --out " + f1.string());
    auto r2 = run_cli("synth --family step --n 500 --seed 7 --out " + f2.string());
    REQUIRE(r1.code == 0);
    REQUIRE(r2.code == 0);
    const std::string b1 = read_file(f1), b2 = read_file(f2);
    CHECK(b1 == b2);
    CHECK(b1.rfind("score,label\n", 0) == 0);
    CHECK(std::count(b1.begin(), b1.end(), '\n') == 501);

    // stdout and --out carry identical bytes
    auto pipe = run_cli("synth --family step --n 500 --seed 7");
    CHECK(pipe.code == 0);
    CHECK(pipe.out == b1);

    // underscore alias matches the hyphen spelling
    auto hy = run_cli("synth --family hf-adversarial --n 50 --seed 1");
    auto un = run_cli("synth --family hf_adversarial --n 50 --seed 1");
    CHECK(hy.out == un.out);
}

TEST_CASE("ece prints one bare number") {
    auto r = run_cli("ece --input - --bins 1", "score,label\n0.9,0\n", true);
    REQUIRE(r.code == 0);
    CHECK(r.out.find('{') == std::string::npos);
    CHECK(std::stod(r.out) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(r.out.back() == '\n');

    // synth output feeds ece unmodified; calibrated data stays near zero
    // (binomial bin noise only)
    const fs::path f = scratch_dir() / "cal.csv";
    REQUIRE(run_cli("synth --family identity --n 1000 --seed 5 --out " +
                    f.string())
                .code == 0);
    auto r2 = run_cli("ece --input " + f.string());
    REQUIRE(r2.code == 0);
    const double v = std::stod(r2.out);
    CHECK(v >= 0.0);
    CHECK(v < 0.1);
}

TEST_CASE("perturb keeps labels and row count, changes scores") {
    const fs::path f = scratch_dir() / "p.csv";
    REQUIRE(run_cli("synth --family identity --n 200 --seed 4 --out " +
                    f.string())
                .code == 0);
    const std::string original = read_file(f);
    auto r = run_cli("perturb --input " + f.string() + " --h 0.015625 --seed 9");
    REQUIRE(r.code == 0);
    CHECK(r.out != original);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 201);

    // labels column is untouched
    std::istringstream a(original), b(r.out);
    std::string la, lb;
    std::getline(a, la);
    std::getline(b, lb);
    CHECK(la == lb);  // header
    while (std::getline(a, la) && std::getline(b, lb)) {
        CHECK(la.substr(la.rfind(',')) == lb.substr(lb.rfind(',')));
    }

    auto again =
        run_cli("perturb --input " + f.string() + " --h 0.015625 --seed 9");
    CHECK(again.out == r.out);
}

TEST_CASE("certify emits a full report for every method") {
    const fs::path f = scratch_dir() / "c.csv";
    REQUIRE(run_cli("synth --family smooth-wiggle --n 2000 --seed 2 --out " +
                    f.string())
                .code == 0);

    for (const std::string method : {"tv", "nw", "lipschitz"}) {
        auto r = run_cli("certify --input " + f.string() + " --method " +
                         method + " --delta 0.05 --seed 1");
        REQUIRE(r.code == 0);
        const json j = json::parse(r.out);
        CHECK(j.at("method") == method);
        const double bound = j.at("bound").get<double>();
        CHECK(bound >= 0.0);
        CHECK(bound <= 1.0);
        CHECK(j.at("delta") == 0.05);
        CHECK(j.contains("terms"));
        CHECK(j.contains("details"));
        const json man = j.at("manifest");
        CHECK(man.at("command") == "certify");
        CHECK(man.at("seed") == 1);
        CHECK(man.at("version") == "0.1.0");
        CHECK(man.at("duration_seconds").get<double>() >= 0.0);
        const std::string digest = man.at("input_digest").get<std::string>();
        CHECK(digest.rfind("fnv1a64:", 0) == 0);
        CHECK(digest.size() == 8 + 16);

        if (method == "nw") {
            CHECK(j.at("details").at("b1") == 32.0);
            CHECK(j.at("details").at("b2") == 6144.0);
            CHECK(man.at("parameters").at("h") == 0.015625);
        }
        if (method == "tv") {
            CHECK(man.at("parameters").at("V") == 1.0);
            CHECK(j.at("details").at("v_hat").get<double>() >= 0.0);
        }
        if (method == "lipschitz") {
            CHECK(man.at("parameters").at("L") == 1.0);
            CHECK(j.at("details").at("winner_buckets").get<double>() >= 1.0);
        }
    }
}

TEST_CASE("certify reads stdin when --input is '-'") {
    const fs::path f = scratch_dir() / "sin.csv";
    REQUIRE(run_cli("synth --family identity --n 300 --seed 6 --out " +
                    f.string())
                .code == 0);
    auto direct = run_cli("certify --input " + f.string() + " --method nw");
    auto piped = run_cli("certify --input - --method nw", read_file(f), true);
    REQUIRE(direct.code == 0);
    REQUIRE(piped.code == 0);
    const json a = strip_duration(json::parse(direct.out));
    json b = strip_duration(json::parse(piped.out));
    b["manifest"]["parameters"]["input"] = a["manifest"]["parameters"]["input"];
    CHECK(a == b);  // identical bytes -> identical digest and report
}

TEST_CASE("identical runs are identical up to wall time") {
    const fs::path f = scratch_dir() / "det.csv";
    REQUIRE(run_cli("synth --family offset --n 1500 --seed 3 --out " +
                    f.string())
                .code == 0);
    auto r1 = run_cli("certify --input " + f.string() +
                      " --method tv --seed 11 --threads 1");
    auto r2 = run_cli("certify --input " + f.string() +
                      " --method tv --seed 11 --threads 4");
    REQUIRE(r1.code == 0);
    REQUIRE(r2.code == 0);
    // the manifest records the *requested* thread count; everything else
    // must be bitwise identical
    json j1 = strip_duration(json::parse(r1.out));
    json j2 = strip_duration(json::parse(r2.out));
    CHECK(j1["manifest"]["parameters"]["threads"] == 1);
    CHECK(j2["manifest"]["parameters"]["threads"] == 4);
    j2["manifest"]["parameters"]["threads"] = 1;
    CHECK(j1 == j2);

    auto r3 = run_cli("certify --input " + f.string() +
                      " --method tv --seed 12");
    CHECK(json::parse(r3.out).at("bound") !=
          json::parse(r1.out).at("bound"));
}

TEST_CASE("bench writes a csv and a json summary") {
    const fs::path csv = scratch_dir() / "rates.csv";
    auto r = run_cli(
        "bench --family identity --methods ece --n 200,400 --repeats 2 "
        "--seed 5 --threads 1 --out " +
        csv.string());
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j.at("family") == "identity");
    CHECK(j.at("true_ce") == 0.0);
    REQUIRE(j.at("series").size() == 1);
    CHECK(j.at("series")[0].at("method") == "ece");
    CHECK(j.at("series")[0].at("points").size() == 2);
    CHECK(j.at("manifest").at("command") == "bench");

    const std::string table = read_file(csv);
    CHECK(table.rfind("method,n,mean_gap,std_gap\n", 0) == 0);
    CHECK(std::count(table.begin(), table.end(), '\n') == 3);
    CHECK(table.find("ece,200,") != std::string::npos);
    CHECK(table.find("ece,400,") != std::string::npos);
}

TEST_SUITE_END();
