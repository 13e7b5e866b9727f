#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

using json = nlohmann::json;

namespace {

struct Run {
    int code = -1;
    std::string out;
    json report() const { return json::parse(out); }
};

Run run(const std::string& args) {
    Run r;
    std::string cmd = std::string(ISINGLOOP_CLI) + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    for (std::size_t n; (n = fread(buf, 1, sizeof buf, p)) > 0;) r.out.append(buf, n);
    int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string tmp(const std::string& name) { return "cli_test_" + name; }

}  // namespace

TEST_CASE("pt-solve reports the critical point") {
    auto r = run("pt-solve --no-fit");
    CHECK(r.code == 0);
    auto j = r.report();
    CHECK(std::abs(j["diagnostics"]["critical_point"]["x_c"].get<double>() - 0.2679491924311227) < 1e-10);
    CHECK(j["checks"]["x_c_equals_2_minus_sqrt3"] == true);
    CHECK(j["config"]["no_fit"] == true);
    CHECK(j["version"].is_string());
}

TEST_CASE("pt-solve at infinite temperature") {
    auto j = run("pt-solve --at-x 0").report();
    REQUIRE(j["rows"].size() == 1);
    CHECK(j["rows"][0]["value"].get<double>() == doctest::Approx(-std::log(2.0)));
    CHECK(j["rows"][0]["T"].is_null());
}

TEST_CASE("pt-solve records the specific-heat fit") {
    auto r = run("pt-solve --fit-window 1e-4:1e-2 --points 6");
    CHECK(r.code == 0);
    auto j = r.report();
    CHECK(j["diagnostics"]["fit"]["r2"].get<double>() > 0.99);
    CHECK(j["rows"].size() == 12);
    CHECK(run("pt-solve --fit-window 1e-2:1e-4").code == 64);
}

TEST_CASE("sc-series determinant check and comparison") {
    auto r = run("sc-series --check-det");
    CHECK((r.code == 0 || r.code == 2));
    auto j = r.report();
    CHECK(j["checks"]["det_matches_printed"] == true);
    CHECK(j["checks"]["naive_matches_printed"] == true);
    CHECK(j["checks"]["sqrt_order2_matches_printed"] == true);
    int rows = 0;
    for (const auto& row : j["rows"]) {
        ++rows;
        if (row["r"].get<int>() % 2 == 1) CHECK(row["value"] == "0");
        if (row["source"] == "log" && row["r"] == 4) CHECK(row["agree"] == true);
    }
    CHECK(rows == 18);
    bool any_disagree = false;
    for (const auto& row : j["rows"]) any_disagree = any_disagree || row["agree"] == false;
    CHECK(r.code == (any_disagree ? 2 : 0));
}

TEST_CASE("sc-series naive mode") {
    auto j = run("sc-series --naive --order 4").report();
    CHECK(j["checks"]["naive_root_equals_2_minus_sqrt3"] == true);
    CHECK(j["diagnostics"]["log"]["naive"] == true);
    for (const auto& row : j["rows"]) {
        bool flagged = false;
        for (const auto& f : row["flags"]) flagged = flagged || f == "naive";
        CHECK(flagged);
    }
}

TEST_CASE("exit codes") {
    CHECK(run("sc-series --bogus").code == 64);
    CHECK(run("").code == 64);
    CHECK(run("sc-series --order 12").code == 64);
    auto b = run("sc-series --term-budget 200");
    CHECK(b.code == 3);
    auto j = b.report();
    CHECK(j["diagnostics"]["budget_exceeded"]["reached_order"].get<int>() < 8);
    CHECK(run("oracle --lattice sq --sides 4,7 --exhaustive").code == 3);
}

TEST_CASE("loops --examples") {
    auto r = run("loops --examples --whitney-length 6");
    CHECK(r.code == 0);
    auto j = r.report();
    CHECK(j["diagnostics"]["examples_summary"] == "Example1:+1, Example2:0, Example3:0");
    CHECK(j["checks"]["whitney_all_pass"] == true);
}

TEST_CASE("oracle exhaustive equals the full product expansion") {
    auto r = run("oracle --lattice sq --L 4 --exhaustive");
    CHECK(r.code == 0);
    CHECK(r.report()["checks"]["exhaustive_equals_full_partition"] == true);
}

TEST_CASE("ht-expand at order zero") {
    auto j = run("ht-expand --lattice sc --order 0").report();
    CHECK(j["diagnostics"]["S"] == json::array({"1"}));
}

TEST_CASE("config file values yield to flags") {
    {
        std::ofstream f(tmp("run.cfg"));
        f << "# sample\norder=6\nnaive=true\n";
    }
    auto a = run("sc-series --config " + tmp("run.cfg")).report();
    CHECK(a["config"]["order"] == 6);
    CHECK(a["config"]["naive"] == true);
    auto b = run("sc-series --config " + tmp("run.cfg") + " --order 4").report();
    CHECK(b["config"]["order"] == 4);
    std::remove(tmp("run.cfg").c_str());
}

TEST_CASE("reports are byte-identical across runs") {
    for (std::string cmd : {"sc-series --order 6", "loops --examples --whitney-length 6", "pt-solve --points 4",
                            "ht-expand --lattice sq --order 6 --compare", "oracle --lattice pt --L 3 --per-site --order 6"}) {
        CAPTURE(cmd);
        run(cmd + " --out " + tmp("a.json") + " --csv " + tmp("a.csv"));
        run(cmd + " --out " + tmp("b.json") + " --csv " + tmp("b.csv"));
        CHECK(slurp(tmp("a.json")) == slurp(tmp("b.json")));
        CHECK(slurp(tmp("a.csv")) == slurp(tmp("b.csv")));
        CHECK_FALSE(slurp(tmp("a.json")).empty());
        for (auto n : {"a.json", "b.json", "a.csv", "b.csv"}) std::remove(tmp(n).c_str());
    }
}

TEST_CASE("csv export has one line per row") {
    run("oracle --lattice sq --L 4 --order 6 --csv " + tmp("o.csv") + " --out " + tmp("o.json"));
    std::string csv = slurp(tmp("o.csv"));
    CHECK(csv.rfind("connected,flags,r,source,value\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 8);
    std::remove(tmp("o.csv").c_str());
    std::remove(tmp("o.json").c_str());
}
