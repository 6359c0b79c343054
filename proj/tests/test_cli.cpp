#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "robustde/dataset.hpp"
#include "robustde/simulate.hpp"
#include "survey_fixture.hpp"

using namespace robustde;

namespace {

std::string tmp_dir() {
    static const std::string dir = [] {
        std::string d = "/tmp/robustde_cli_" + std::to_string(::getpid());
        std::filesystem::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << text;
}

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    const std::string stem = tmp_dir() + "/run" + std::to_string(counter++);
    const std::string cmd = std::string(ROBUSTDE_CLI_PATH) + " " + args +
                            " >" + stem + ".out 2>" + stem + ".err";
    const int status = std::system(cmd.c_str());
    RunResult r;
    REQUIRE(status != -1);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(stem + ".out");
    r.err = slurp(stem + ".err");
    return r;
}

double extract_number(const std::string& text, const std::string& key) {
    const std::string needle = "\"" + key + "\": ";
    const auto pos = text.find(needle);
    REQUIRE(pos != std::string::npos);
    return std::stod(text.substr(pos + needle.size()));
}

// Eight-row crossed design with Y = A*W: the plug-in estimate is exactly 0.5.
std::string crossed_csv() {
    static const std::string path = [] {
        Dataset d;
        d.x.resize(8, 0);
        d.a.resize(8);
        d.w.resize(8);
        d.y.resize(8);
        const double rows[8][2] = {{0, 0}, {0, 0}, {0, 0}, {0, 1},
                                   {1, 0}, {1, 1}, {1, 1}, {1, 1}};
        for (int i = 0; i < 8; ++i) {
            d.a[i] = rows[i][0];
            d.w[i] = rows[i][1];
            d.y[i] = d.a[i] * d.w[i];
        }
        const std::string p = tmp_dir() + "/crossed.csv";
        std::ofstream out(p);
        write_csv(d, out);
        return p;
    }();
    return path;
}

std::string simulated_csv() {
    static const std::string path = [] {
        const Dataset d = draw(DgpSpec::standard(2), 300, 901);
        const std::string p = tmp_dir() + "/sim.csv";
        std::ofstream out(p);
        write_csv(d, out);
        return p;
    }();
    return path;
}

std::string survey_csv() {
    static const std::string path = [] {
        const Dataset d = robustde::testing::make_informative_sample(
            {.strata = 2, .psus_per_stratum = 4, .cluster_size = 15,
             .seed = 902});
        const std::string p = tmp_dir() + "/survey.csv";
        std::ofstream out(p);
        write_csv(d, out);
        return p;
    }();
    return path;
}

std::string data_args(const std::string& csv) {
    return " --csv " + csv + " --x x0 --a a --w w --y y";
}

}  // namespace

TEST_CASE("estimate is exact on the crossed fixture in plug-in mode") {
    const RunResult r = run_cli("estimate --csv " + crossed_csv() +
                                " --a a --w w --y y --K 1 --seed 7");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("\"estimand\": \"psi\"") != std::string::npos);
    CHECK(std::abs(extract_number(r.out, "point") - 0.5) < 1e-12);
}

TEST_CASE("estimate output is byte-identical across reruns") {
    const std::string args = "estimate" + data_args(simulated_csv()) +
                             " --K 5 --seed 31 --union --B 40";
    const RunResult a = run_cli(args);
    const RunResult b = run_cli(args);
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.find("\"union\"") != std::string::npos);
    CHECK(a.out.find("\"p_max\"") != std::string::npos);
    CHECK(a.out.find("\"lambda\"") != std::string::npos);

    const std::string csv_args = args + " --format csv";
    const RunResult c = run_cli(csv_args);
    const RunResult d = run_cli(csv_args);
    REQUIRE(c.code == 0);
    CHECK(c.out == d.out);
    CHECK(c.out.rfind("dropped_rows,psi_point", 0) == 0);
}

TEST_CASE("--out writes the same bytes as stdout") {
    const std::string base = "estimate" + data_args(simulated_csv()) +
                             " --K 5 --seed 31";
    const RunResult a = run_cli(base);
    const std::string out_file = tmp_dir() + "/est.json";
    const RunResult b = run_cli(base + " --out " + out_file);
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(b.out.empty());
    CHECK(slurp(out_file) == a.out);
}

TEST_CASE("exit codes follow the error taxonomy") {
    // Unknown column name: configuration error.
    const RunResult cfg = run_cli("estimate --csv " + crossed_csv() +
                                  " --a nope --w w --y y --K 1 --seed 1");
    CHECK(cfg.code == 2);
    CHECK(cfg.err.find("config error") != std::string::npos);

    // Non-binary exposure: data error.
    const std::string bad = tmp_dir() + "/bad_exposure.csv";
    spit(bad,
         "x0,a,w,y\n0.1,2,0,1.0\n0.2,0,1,0.5\n0.3,1,0,0.2\n0.4,1,1,0.9\n");
    const RunResult data = run_cli("estimate" + data_args(bad) +
                                   " --K 1 --seed 1");
    CHECK(data.code == 3);
    CHECK(data.err.find("data error") != std::string::npos);

    // Collinear covariates: numeric error.
    const std::string collinear = tmp_dir() + "/collinear.csv";
    {
        std::ostringstream body;
        body << "x0,x1,a,w,y\n";
        const double rows[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
        for (int c = 0; c < 3; ++c) {
            for (int i = 0; i < 4; ++i) {
                const double x = 0.1 * (4 * c + i + 1);
                body << x << ',' << 2.0 * x << ',' << rows[i][0] << ','
                     << rows[i][1] << ',' << (0.3 * x + rows[i][0]) << '\n';
            }
        }
        spit(collinear, body.str());
    }
    const RunResult numeric = run_cli("estimate --csv " + collinear +
                                      " --x x0,x1 --a a --w w --y y"
                                      " --K 1 --seed 1");
    CHECK(numeric.code == 4);
    CHECK(numeric.err.find("numeric error") != std::string::npos);

    // Missing required option: parse error.
    const RunResult parse = run_cli("estimate --csv " + crossed_csv() +
                                    " --a a --w w --y y");
    CHECK(parse.code == 2);
}

TEST_CASE("expand reference-codes categorical columns") {
    const std::string input = tmp_dir() + "/colors.csv";
    spit(input, "id,color,y\n1,red,0.5\n2,blue,1.5\n3,green,2.5\n4,red,3.5\n");
    const RunResult r = run_cli("expand --csv " + input +
                                " --categorical color");
    REQUIRE(r.code == 0);
    CHECK(r.out ==
          "id,color_green,color_red,y\n"
          "1,0,1,0.5\n"
          "2,0,0,1.5\n"
          "3,1,0,2.5\n"
          "4,0,1,3.5\n");
}

TEST_CASE("sensitivity sweep emits a deterministic gamma grid") {
    const std::string args = "sensitivity" + data_args(simulated_csv()) +
                             " --K 5 --seed 31 --sweep 0:1:0.5 --format csv";
    const RunResult a = run_cli(args);
    const RunResult b = run_cli(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.rfind("gamma,lo,hi\n", 0) == 0);
    CHECK(std::count(a.out.begin(), a.out.end(), '\n') == 4);

    const RunResult j = run_cli("sensitivity" + data_args(simulated_csv()) +
                                " --K 5 --seed 31");
    REQUIRE(j.code == 0);
    CHECK(j.out.find("\"e_tv\"") != std::string::npos);
    CHECK(j.out.find("\"bound\"") != std::string::npos);
    CHECK(j.out.find("\"gamma_source\": \"fit\"") != std::string::npos);
}

TEST_CASE("survey bootstrap reports design and bootstrap intervals") {
    const std::string args =
        "survey-bootstrap" + data_args(survey_csv()) +
        " --weight weight --stratum stratum --psu psu"
        " --B 20 --seed 5 --K 4 --targets psi";
    const RunResult a = run_cli(args);
    const RunResult b = run_cli(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.find("\"boot_ci_lo\"") != std::string::npos);
    CHECK(a.out.find("\"design_se\"") != std::string::npos);
    CHECK(a.out.find("\"target\": \"psi\"") != std::string::npos);
}

TEST_CASE("simulate writes its result files deterministically") {
    const std::string dir1 = tmp_dir() + "/study1";
    const std::string dir2 = tmp_dir() + "/study2";
    const std::string base =
        "simulate --cases 2 --ns 120 --reps 6 --K 3 --seed 11 --out-dir ";
    const RunResult a = run_cli(base + dir1);
    const RunResult b = run_cli(base + dir2);
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(a.out.find("\"cells\": 1") != std::string::npos);
    for (const std::string name :
         {"summary.csv", "estimates.csv", "reference_lines.csv"}) {
        CAPTURE(name);
        REQUIRE(std::filesystem::exists(dir1 + "/" + name));
        CHECK(slurp(dir1 + "/" + name) == slurp(dir2 + "/" + name));
    }
    const std::string summary = slurp(dir1 + "/summary.csv");
    CHECK(summary.rfind("case,n,mean_onestep", 0) == 0);
}
