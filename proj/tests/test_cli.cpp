#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using sslice::cli::run;

namespace {

const std::string kReturns = std::string(SSLICE_SOURCE_DIR) + "/data/synthetic_returns.csv";

fs::path scratch(const std::string& name) {
    const fs::path p = fs::path(SSLICE_TEST_TMP) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

fs::path write_file(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
    return p;
}

std::vector<std::vector<double>> read_grid(const fs::path& p) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

// Band on a * x with a_i = i - 25, plus a cut on the coordinate sum of the
// first half: two directions in d = 50.
std::string two_family_body() {
    std::string a, b;
    for (int i = 1; i <= 50; ++i) {
        a += (i > 1 ? ", " : "") + std::to_string(i - 25);
        b += (i > 1 ? ", " : "") + std::string(i <= 25 ? "1" : "0");
    }
    std::string neg;
    for (int i = 1; i <= 50; ++i) neg += (i > 1 ? ", " : "") + std::to_string(25 - i);
    return R"({"simplex": "unit:50", "halfspaces": [)"
           R"({"normal": [)" + a + R"(], "offset": 2.5371},)"
           R"({"normal": [)" + neg + R"(], "offset": 1.4213},)"
           R"({"normal": [)" + b + R"(], "offset": 0.55317}]})";
}

}  // namespace

TEST_CASE("volume with varsi") {
    const fs::path dir = scratch("varsi");
    write_file(dir / "body.json", R"({"simplex": "unit:3", "halfspaces": [{"normal": [1, 1, 1], "offset": 0.5}]})");
    REQUIRE(run({"volume", "--body", (dir / "body.json").string(), "--seed", "1", "--out-dir", dir.string()}) == 0);
    const auto r = read_json(dir / "result.json");
    CHECK(r["method"] == "varsi");
    CHECK(r["requested_method"] == "auto");
    CHECK(r["fraction"].get<double>() == doctest::Approx(0.125).epsilon(1e-14));
    CHECK(r["value"].get<double>() == doctest::Approx(0.125 / 6).epsilon(1e-14));
    CHECK(r["seed"] == 1);

    const auto m = read_json(dir / "manifest.json");
    CHECK(m["status"] == "complete");
    CHECK(m["inputs"][0]["fnv1a64"] == sslice::cli::fnv1a64_hex(slurp(dir / "body.json")));
    CHECK(m["seeds"]["seed"] == 1);
}

TEST_CASE("auto dispatch picks exact rational arithmetic for two families at d = 50") {
    const fs::path dir = scratch("lawrence");
    write_file(dir / "body.json", two_family_body());
    REQUIRE(run({"volume", "--body", (dir / "body.json").string(), "--seed", "1", "--out-dir", dir.string()}) == 0);
    const auto r = read_json(dir / "result.json");
    CHECK(r["method"] == "lawrence");
    CHECK(r["backend"] == "rational");
    CHECK(r.contains("value_exact"));
    CHECK(r["value"].get<double>() > 0.0);
}

TEST_CASE("bad inputs give data and usage exit codes") {
    const fs::path dir = scratch("bad");
    write_file(dir / "broken.json", R"({"simplex": "unit:3", "halfspaces": [)");
    CHECK(run({"volume", "--body", (dir / "broken.json").string(), "--out-dir", dir.string()}) == 3);
    CHECK_FALSE(fs::exists(dir / "result.json"));
    CHECK(run({"volume", "--body", (dir / "missing.json").string(), "--out-dir", dir.string()}) == 3);
    CHECK(run({"volume", "--out-dir", dir.string()}) == 2);
    CHECK(run({"nonsense"}) == 2);
    write_file(dir / "two.json", R"({"simplex": "unit:3", "halfspaces": [{"normal": [1, 0, 0], "offset": 0.5},
                                      {"normal": [0, 1, 0], "offset": 0.5}]})");
    CHECK(run({"volume", "--body", (dir / "two.json").string(), "--method", "varsi", "--out-dir", dir.string()}) == 2);
    CHECK(run({"copula", "--returns", (dir / "missing.csv").string(), "--out-dir", dir.string()}) == 3);

    // The installed binary maps errors to the same codes.
    const std::string bin = SSLICE_CLI_BIN;
    const std::string quiet = " > /dev/null 2>&1";
    const int rc = std::system((bin + " volume --body " + (dir / "broken.json").string() + " --out-dir " + dir.string() + quiet).c_str());
    CHECK(WEXITSTATUS(rc) == 3);
    const int usage = std::system((bin + " volume" + quiet).c_str());
    CHECK(WEXITSTATUS(usage) == 2);
}

TEST_CASE("copula grid sums to one") {
    const fs::path dir = scratch("copula");
    REQUIRE(run({"copula", "--returns", kReturns, "--m", "100", "--n", "500000", "--seed", "4", "--out-dir", dir.string()}) == 0);
    const auto grid = read_grid(dir / "copula.csv");
    REQUIRE(grid.size() == 100);
    double sum = 0.0;
    for (const auto& row : grid) {
        CHECK(row.size() == 100);
        for (double v : row) sum += v;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    const auto side = read_json(dir / "copula.json");
    CHECK(side["m"] == 100);
    CHECK(side["seed"] == 4);
    CHECK(side["axes"][0]["levels"].size() == 99);
}

TEST_CASE("outputs do not depend on the thread count") {
    const fs::path one = scratch("threads1");
    const fs::path two = scratch("threads2");
    const std::vector<std::string> base{"indicator", "--returns", kReturns, "--m", "20", "--n", "4000", "--seed", "6"};
    auto with = [&](const fs::path& dir, const char* threads) {
        auto args = base;
        args.insert(args.end(), {"--threads", threads, "--out-dir", dir.string()});
        return run(args);
    };
    REQUIRE(with(one, "1") == 0);
    REQUIRE(with(two, "2") == 0);
    CHECK(slurp(one / "indicator.csv") == slurp(two / "indicator.csv"));
    CHECK(slurp(one / "warnings.csv") == slurp(two / "warnings.csv"));
}

TEST_CASE("indicator matches the golden warnings") {
    const fs::path dir = scratch("golden");
    REQUIRE(run({"indicator", "--returns", kReturns, "--seed", "11", "--m", "50", "--n", "10000", "--out-dir", dir.string()}) == 0);
    CHECK(slurp(dir / "warnings.csv") == slurp(fs::path(SSLICE_SOURCE_DIR) / "tests/golden/warnings.csv"));
    const auto m = read_json(dir / "manifest.json");
    CHECK(m["status"] == "complete");
    CHECK(m["outputs"].size() == 2);
}

TEST_CASE("config files fill in flags not given on the command line") {
    const fs::path dir = scratch("config");
    write_file(dir / "run.cfg", "# sample run\n[sample]\nseed = 5\nn=3\nmethod = sorted\n");
    REQUIRE(run({"sample", "--dim", "2", "--seed", "9", "--config", (dir / "run.cfg").string(), "--out-dir", dir.string()}) == 0);
    const auto m = read_json(dir / "manifest.json");
    CHECK(m["seeds"]["seed"] == 9);
    CHECK(m["config"]["method"] == "sorted");
    const std::string csv = slurp(dir / "points.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

    const auto spliced = sslice::cli::apply_config({"volume", "--seed", "1"}, "seed=2\nallow_nonconvex_high_d = true\nsampler=sorted\n");
    CHECK(spliced == std::vector<std::string>{"volume", "--allow-nonconvex-high-d", "--sampler", "sorted", "--seed", "1"});
}

TEST_CASE("seeds are generated and recorded when absent") {
    const fs::path dir = scratch("seedless");
    REQUIRE(run({"sample", "--dim", "3", "--n", "10", "--out-dir", dir.string()}) == 0);
    const auto m = read_json(dir / "manifest.json");
    REQUIRE(m["seeds"]["seed"].is_number_unsigned());
    const auto seed = m["seeds"]["seed"].get<std::uint64_t>();
    const fs::path again = scratch("seeded");
    REQUIRE(run({"sample", "--dim", "3", "--n", "10", "--seed", std::to_string(seed), "--out-dir", again.string()}) == 0);
    CHECK(slurp(dir / "points.csv") == slurp(again / "points.csv"));
}

TEST_CASE("fnv1a64") {
    CHECK(sslice::cli::fnv1a64_hex("") == "cbf29ce484222325");
    CHECK(sslice::cli::fnv1a64_hex("a") == "af63dc4c8601ec8c");
}
