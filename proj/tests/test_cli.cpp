#include <doctest.h>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"

using namespace blowup;
using namespace blowup::cli;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result call(std::vector<std::string> args) {
    args.insert(args.begin(), "blowup");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> v;
    std::istringstream is(text);
    for (std::string l; std::getline(is, l);)
        v.push_back(l);
    return v;
}

std::vector<std::string> fields(const std::string& line) {
    std::vector<std::string> v;
    std::istringstream is(line);
    for (std::string f; std::getline(is, f, ',');)
        v.push_back(f);
    return v;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("blowup_cli_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

nlohmann::json last_json_line(const std::string& text) { return nlohmann::json::parse(lines(text).back()); }

} // namespace

TEST_CASE("format_double round-trips with 17 significant digits") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.5e-300).find(',') == std::string::npos);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 1000; ++i) {
        const double v = std::ldexp(std::uniform_real_distribution<double>(-1, 1)(rng), static_cast<int>(rng() % 200) - 100);
        const std::string s = format_double(v);
        double back = 0;
        std::from_chars(s.data(), s.data() + s.size(), back);
        CHECK(back == v);
    }
}

TEST_CASE("solve: Example 2 to xi = 14") {
    const auto r = call({"solve", "--problem", "ex1", "--a", "1", "--method", "nonlocal", "--g", "f-over-y",
                         "--h", "0.2", "--xi-max", "14"});
    REQUIRE(r.code == exit_ok);
    const auto rows = lines(r.out);
    CHECK(rows.front() == "param,x,y");
    CHECK(rows.size() == 72);
    const auto s = last_json_line(r.err);
    // RK4 at h = 0.2 settles 5.4e-5 above the exact x* = 1.
    CHECK(std::fabs(s["x_star"].get<double>() - 1) <= 6e-5);
    CHECK(s["uncertainty"].get<double>() <= 1e-5);
    CHECK(s["steps"] == 70);
    CHECK(s["reason"] == "parameter-bound");
    CHECK(s["beta"].get<double>() == doctest::Approx(1).epsilon(0.02));
    CHECK(s["A"].get<double>() == doctest::Approx(1).epsilon(0.02));
}

TEST_CASE("solve: inline right-hand side, differential transform to t = 1e6") {
    const auto path = scratch() / "inline.csv";
    const auto r = call({"solve", "--rhs", "y^2", "--order", "1", "--x0", "0", "--y0", "1", "--method",
                         "differential", "--h", "0.2", "--t-max", "1e6", "--out", path.string()});
    REQUIRE(r.code == exit_ok);
    const auto s = nlohmann::json::parse(r.out);
    CHECK(std::fabs(s["x_star"].get<double>() - 1) <= 1e-3);
    CHECK(s["parameter"] == "t");
    CHECK(lines(slurp(path)).front() == "param,x,y");
}

TEST_CASE("solve: second-order problems carry a t column") {
    const auto r = call({"solve", "--problem", "ex4-form", "--method", "nonlocal", "--xi-max", "10"});
    REQUIRE(r.code == exit_ok);
    CHECK(lines(r.out).front() == "param,x,y,t");
    CHECK(fields(lines(r.out)[1]).size() == 4);
}

TEST_CASE("solve: exit codes") {
    const auto parse_err = call({"solve", "--rhs", "y^", "--t-max", "10"});
    CHECK(parse_err.code == exit_parse);
    CHECK(parse_err.err.find("column") != std::string::npos);

    CHECK(call({"solve", "--rhs", "1", "--t-max", "10"}).code == exit_singular);
    CHECK(call({"solve", "--problem", "ex1", "--t-max", "10", "--max-steps", "2"}).code == exit_estimation);
    CHECK(call({"solve", "--problem", "ex1", "--t-max", "10", "--out", "/nonexistent-dir/x.csv"}).code == exit_io);
    CHECK(call({"solve", "--problem", "ex1", "--method", "magic", "--t-max", "10"}).code == exit_usage);
    CHECK(call({"solve", "--problem", "ex1", "--h", "-1", "--t-max", "10"}).code == exit_usage);
    CHECK(call({"solve", "--problem", "ex1", "--g", "t-over-y", "--method", "nonlocal", "--xi-max", "5"}).code ==
          exit_usage);
    CHECK(call({"frobnicate"}).code == exit_usage);
    CHECK(call({}).code == exit_usage);

    const auto help = call({"--help"});
    CHECK(help.code == exit_ok);
    CHECK(help.out.find("5") != std::string::npos);
}

TEST_CASE("solve: json-lines output mirrors the CSV columns") {
    const std::vector<std::string> base = {"solve", "--problem", "ex2-form", "--method", "nonlocal", "--xi-max", "3"};
    auto csv_args = base;
    auto jsonl_args = base;
    jsonl_args.insert(jsonl_args.end(), {"--format", "jsonl"});
    const auto csv = lines(call(csv_args).out);
    const auto jsonl = lines(call(jsonl_args).out);
    REQUIRE(csv.size() == jsonl.size() + 1);
    const auto header = fields(csv[0]);
    for (std::size_t i = 0; i < jsonl.size(); ++i) {
        const auto obj = nlohmann::json::parse(jsonl[i]);
        const auto row = fields(csv[i + 1]);
        REQUIRE(obj.size() == header.size());
        for (std::size_t k = 0; k < header.size(); ++k)
            CHECK(obj[header[k]].get<double>() == std::stod(row[k]));
    }
}

TEST_CASE("solve: reruns are byte-identical, files and plot script included") {
    auto run_once = [](const std::string& tag) {
        const auto dir = scratch() / tag;
        fs::create_directories(dir);
        const auto r = call({"solve", "--problem", "ex3", "--t-max", "500", "--out", (dir / "traj.csv").string(),
                             "--summary", (dir / "summary.json").string(), "--plot-script",
                             (dir / "plot.py").string()});
        REQUIRE(r.code == exit_ok);
        return std::vector<std::string>{slurp(dir / "traj.csv"), slurp(dir / "summary.json"), slurp(dir / "plot.py")};
    };
    const auto a = run_once("a");
    const auto b = run_once("b");
    CHECK(a[0] == b[0]);
    CHECK(a[1] == b[1]);
    CHECK(a[2].find("traj.csv") != std::string::npos);
    const auto s = nlohmann::json::parse(a[1]);
    for (const char* key : {"x_star", "uncertainty", "A", "beta", "steps", "reason"})
        CHECK(s.contains(key));
}

TEST_CASE("compare: Example 1, equal budgets") {
    const auto r = call({"compare", "--problem", "ex1", "--right-g", "f-over-y", "--steps", "100"});
    REQUIRE(r.code == exit_ok);
    const auto rows = lines(r.out);
    CHECK(rows.front() == "step,param_left,x_left,err_left,param_right,x_right,err_right");
    REQUIRE(rows.size() == 102);
    const auto last = fields(rows.back());
    CHECK(std::stod(last[6]) < std::stod(last[3]));
}

TEST_CASE("compare: identical sides give identical columns") {
    const auto r = call({"compare", "--problem", "ex2-form", "--left-method", "nonlocal", "--right-method",
                         "nonlocal", "--steps", "50"});
    REQUIRE(r.code == exit_ok);
    const auto rows = lines(r.out);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto f = fields(rows[i]);
        CHECK(f[1] == f[4]);
        CHECK(f[2] == f[5]);
        CHECK(f[3] == f[6]);
    }
}

TEST_CASE("compare: Example 3 against Example 4") {
    RunConfig left;
    left.problem.id = "ex3";
    left.eps_stop = 0;
    RunConfig right = left;
    right.problem.id = "ex4-form";
    right.method = transforms::Method::nonlocal;
    const Comparison cmp = compare(left, right, 100);
    CHECK(cmp.reference_exact);
    REQUIRE(cmp.left.estimate);
    REQUIRE(cmp.right.estimate);
    CHECK(std::fabs(cmp.left.estimate->x_star - 1) <= 2e-2);
    CHECK(std::fabs(cmp.right.estimate->x_star - 1) <= 2e-2);
    const double x_left = cmp.left.trajectory.state(cmp.left.trajectory.size() - 1)[0];
    const double x_right = cmp.right.trajectory.state(cmp.right.trajectory.size() - 1)[0];
    CHECK(std::fabs(x_right - 1) < std::fabs(x_left - 1));
}

TEST_CASE("sweep: fourth-order convergence") {
    auto order_of = [](const std::string& text) {
        const auto rows = lines(text);
        REQUIRE(rows.front() == "h,steps,error,order");
        return std::vector<std::string>{fields(rows[2])[3], fields(rows[3])[3]};
    };
    const auto nl = call({"sweep", "--problem", "ex2-form", "--method", "nonlocal", "--xi-max", "2", "--hs",
                          "0.2,0.1,0.05"});
    REQUIRE(nl.code == exit_ok);
    for (const auto& o : order_of(nl.out))
        CHECK(std::stod(o) == doctest::Approx(4).epsilon(0.3 / 4));

    const auto diff = call({"sweep", "--problem", "ex1", "--method", "differential", "--span", "2", "--hs",
                            "0.2,0.1,0.05"});
    REQUIRE(diff.code == exit_ok);
    for (const auto& o : order_of(diff.out))
        CHECK(std::stod(o) == doctest::Approx(4).epsilon(0.3 / 4));

    CHECK(call({"sweep", "--problem", "ex2-form", "--method", "nonlocal", "--xi-max", "2", "--hs", "0.2"}).code ==
          exit_usage);
}

TEST_CASE("sweep: inline problems use a refined reference run") {
    RunConfig cfg;
    cfg.problem.rhs = "y^2+x";
    cfg.method = transforms::Method::nonlocal;
    cfg.param_max = 2;
    cfg.eps_stop = 0;
    const Sweep sw = sweep(cfg, {0.2, 0.1, 0.05});
    CHECK_FALSE(sw.reference_exact);
    REQUIRE(sw.rows.size() == 3);
    CHECK(sw.rows[0].error > sw.rows[1].error);
    CHECK(sw.rows[1].error > sw.rows[2].error);
}
