#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "haarprod/experiment.hpp"

using namespace haarprod;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "haarprod_test_experiment";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream f(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(f, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

ExperimentConfig parse(std::initializer_list<std::string> args) {
    std::vector<std::string> v{"haarprod"};
    v.insert(v.end(), args.begin(), args.end());
    return parse_command_line(v);
}

int run_quiet(const ExperimentConfig& c) {
    std::ostringstream log;
    return run(c, log);
}

}  // namespace

TEST_CASE("mode names") {
    for (Mode m : {Mode::SampleEigs, Mode::AnalyticCdf, Mode::ExactSample, Mode::Verify, Mode::SeriesCheck}) {
        CHECK(parse_mode(mode_name(m)) == m);
    }
    CHECK_THROWS_AS(parse_mode("plot"), ConfigError);
}

TEST_CASE("command line flags") {
    const auto c = parse({"verify", "--n", "1200", "--dims", "600,600", "--trials", "20", "--seed", "7", "--delta",
                          "0.01", "--workers", "2", "--ks-tolerance", "0.02"});
    CHECK(c.mode == Mode::Verify);
    CHECK(c.n == 1200);
    CHECK(c.dims == std::vector<int>{600, 600});
    CHECK(c.trials == 20);
    CHECK(c.seed == 7);
    CHECK(c.delta == 0.01);
    CHECK(c.workers == 2);
    REQUIRE(c.ks_tolerance.has_value());
    CHECK(*c.ks_tolerance == 0.02);
    CHECK_NOTHROW(validate(c));

    const auto big = parse({"sample-eigs", "--seed", "18446744073709551615", "--n", "4", "--dims", "2,2"});
    CHECK(big.seed == 18446744073709551615ULL);

    CHECK_THROWS_AS(parse({"verify", "--trials", "many"}), ConfigError);
    CHECK_THROWS_AS(parse({"verify", "--colour", "red"}), ConfigError);
    CHECK_THROWS_AS(parse({}), ConfigError);
    CHECK_THROWS_AS(parse({"verify", "--help"}), HelpRequested);
}

TEST_CASE("config file with flag overrides") {
    const fs::path file = scratch_dir() / "config.json";
    {
        std::ofstream f(file);
        f << R"({"n": 40, "dims": [20, 30, 20], "trials": 3, "seed": 11, "grid_points": 7, "ks_tolerance": 0.05})";
    }
    const auto c = parse({"verify", "--config", file.string(), "--trials", "4"});
    CHECK(c.n == 40);
    CHECK(c.dims == std::vector<int>{20, 30, 20});
    CHECK(c.trials == 4);  // flag wins
    CHECK(c.seed == 11);
    CHECK(c.grid_points == 7);
    CHECK(c.mode == Mode::Verify);  // the subcommand wins over nothing in the file

    {
        std::ofstream f(file);
        f << R"({"n": 40, "dimz": [20, 20]})";
    }
    try {
        parse({"verify", "--config", file.string()});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "dimz");
    }
    {
        std::ofstream f(file);
        f << R"({"n": "forty"})";
    }
    try {
        parse({"verify", "--config", file.string()});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "n");
    }
    {
        std::ofstream f(file);
        f << "{ not json";
    }
    CHECK_THROWS_AS(parse({"verify", "--config", file.string()}), ConfigError);
    CHECK_THROWS_AS(parse({"verify", "--config", (scratch_dir() / "missing.json").string()}), ConfigError);
}

TEST_CASE("config JSON round trip") {
    ExperimentConfig c;
    c.mode = Mode::ExactSample;
    c.alphas = {2.0, 2.0};
    c.seed = 123456789012345ULL;
    c.delta = 0.1 + 0.2;
    c.ks_tolerance = 0.03;
    c.out = "a/b.csv";
    CHECK(config_from_json(to_json(c)) == c);
    CHECK(config_from_json(nlohmann::json::parse(to_json(c).dump())) == c);
}

TEST_CASE("validation names the field") {
    auto field_of = [](const ExperimentConfig& c) {
        try {
            validate(c);
        } catch (const ConfigError& e) {
            return e.field();
        }
        return std::string("none");
    };
    ExperimentConfig c;
    c.mode = Mode::Verify;
    c.n = 8;
    c.dims = {4, 4};
    c.trials = 2;
    CHECK(field_of(c) == "none");

    ExperimentConfig bad = c;
    bad.dims = {4, 6};
    CHECK(field_of(bad) == "dims");
    bad = c;
    bad.dims.clear();
    CHECK(field_of(bad) == "dims");
    bad = c;
    bad.trials = 1;  // moments need two trials
    CHECK(field_of(bad) == "trials");
    bad = c;
    bad.delta = 1.5;
    CHECK(field_of(bad) == "delta");
    bad = c;
    bad.dims = {8, 8};  // alpha = 1 has no analytic law
    CHECK(field_of(bad) == "dims");

    ExperimentConfig cdf;
    cdf.mode = Mode::AnalyticCdf;
    CHECK(field_of(cdf) == "alphas");
    cdf.alphas = {1.0};
    CHECK(field_of(cdf) == "dims");
    cdf.alphas = {2.0, 1.5};
    CHECK(field_of(cdf) == "none");
    cdf.grid_points = 1;
    CHECK(field_of(cdf) == "grid_points");

    ExperimentConfig exact;
    exact.mode = Mode::ExactSample;
    exact.alphas = {1.0, 1.0};  // the unit circle case is allowed here
    CHECK(field_of(exact) == "none");
    exact.alphas = {2.0, 1.5};
    CHECK(field_of(exact) == "alphas");
}

TEST_CASE("default output directory from the environment") {
    ExperimentConfig c;
    c.mode = Mode::SeriesCheck;
    ::unsetenv("HAARPROD_OUT_DIR");
    CHECK(output_path(c) == fs::path(".") / "series_check.csv");
    ::setenv("HAARPROD_OUT_DIR", "/tmp/somewhere", 1);
    CHECK(output_path(c) == fs::path("/tmp/somewhere/series_check.csv"));
    c.out = "explicit.csv";
    CHECK(output_path(c) == fs::path("explicit.csv"));
    ::unsetenv("HAARPROD_OUT_DIR");
}

TEST_CASE("analytic-cdf reaches 1 at the support endpoint") {
    ExperimentConfig c;
    c.mode = Mode::AnalyticCdf;
    c.alphas = {2.0};
    c.grid_points = 3;
    c.out = scratch_dir() / "cdf.csv";
    REQUIRE(run_quiet(c) == 0);
    const auto rows = read_csv(c.out);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == std::vector<std::string>{"t", "cdf", "pdf"});
    CHECK(std::abs(std::stod(rows[3][0]) - 1.0 / std::sqrt(2.0)) <= 1e-15);
    CHECK(std::stod(rows[3][1]) == 1.0);
    CHECK(std::stod(rows[1][0]) == 0.0);
    CHECK(std::stod(rows[1][1]) == 0.0);
    // t = 1/(2 sqrt 2): t^2 / (1 - t^2) = 1/7.
    CHECK(std::abs(std::stod(rows[2][1]) - 1.0 / 7.0) <= 1e-14);

    c.alphas = {2.0, 1.5};
    REQUIRE(run_quiet(c) == 0);
    CHECK(read_csv(c.out)[0] == std::vector<std::string>{"t", "cdf"});
}

TEST_CASE("series-check residuals") {
    for (const auto& alphas : {std::vector<double>{2.0, 2.0}, std::vector<double>{3.0, 1.25, 1.5}}) {
        ExperimentConfig c;
        c.mode = Mode::SeriesCheck;
        c.alphas = alphas;
        c.out = scratch_dir() / "series.csv";
        REQUIRE(run_quiet(c) == 0);
        const auto rows = read_csv(c.out);
        REQUIRE(rows.size() > 1);
        CHECK(rows[0] == std::vector<std::string>{"check", "index", "max_residual"});
        for (std::size_t i = 1; i < rows.size(); ++i) {
            CAPTURE(rows[i][0]);
            CHECK(std::stod(rows[i][2]) <= 1e-11);
        }
    }
}

TEST_CASE("sample-eigs table round-trips the doubles") {
    ExperimentConfig c;
    c.mode = Mode::SampleEigs;
    c.n = 30;
    c.dims = {10, 20, 10};
    c.trials = 2;
    c.seed = 5;
    c.out = scratch_dir() / "eigs.csv";
    REQUIRE(run_quiet(c) == 0);
    const auto rows = read_csv(c.out);
    CHECK(rows[0] == std::vector<std::string>{"trial", "re", "im", "radius", "angle"});
    const EigenSample s = collect_sample(c.aspect(), c.trials, c.seed);
    REQUIRE(rows.size() == s.size() + 1);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto& r = rows[i + 1];
        CHECK(std::stoi(r[0]) == s.trial[i]);
        CHECK(std::stod(r[1]) == s.eigenvalues[i].real());
        CHECK(std::stod(r[2]) == s.eigenvalues[i].imag());
        CHECK(std::stod(r[3]) == s.radii[i]);
        CHECK(std::stod(r[4]) == s.angles[i]);
    }
    const std::string first = slurp(c.out);
    REQUIRE(run_quiet(c) == 0);
    CHECK(slurp(c.out) == first);
}

TEST_CASE("exact-sample table") {
    ExperimentConfig c;
    c.mode = Mode::ExactSample;
    c.alphas = {1.0, 1.0};
    c.count = 50;
    c.out = scratch_dir() / "exact.csv";
    REQUIRE(run_quiet(c) == 0);
    const auto rows = read_csv(c.out);
    REQUIRE(rows.size() == 51);
    CHECK(rows[0] == std::vector<std::string>{"index", "re", "im", "radius", "angle"});
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(std::abs(std::stod(rows[i][3]) - 1.0) <= 1e-15);
        const double angle = std::stod(rows[i][4]);
        CHECK(angle >= 0.0);
        CHECK(angle < 2.0 * M_PI);
    }
}

TEST_CASE("verify is byte-identical across runs and worker counts") {
    ExperimentConfig c;
    c.mode = Mode::Verify;
    c.n = 200;
    c.dims = {100, 100};
    c.trials = 6;
    c.seed = 7;
    c.out = scratch_dir() / "verify_a.json";
    const int status = run_quiet(c);
    CHECK((status == 0 || status == 1));
    const std::string a = slurp(c.out);

    c.out = scratch_dir() / "verify_b.json";
    run_quiet(c);
    const std::string b = slurp(c.out);

    c.workers = 3;
    c.out = scratch_dir() / "verify_c.json";
    run_quiet(c);
    std::string d = slurp(c.out);

    // The reports echo the output path; compare everything else.
    auto strip = [](std::string s) {
        auto j = nlohmann::json::parse(s);
        j["config"].erase("out");
        j["config"].erase("workers");
        return j.dump();
    };
    CHECK(strip(a) == strip(b));
    CHECK(strip(a) == strip(d));

    c.workers = 1;
    c.out = scratch_dir() / "verify_a.json";
    run_quiet(c);
    CHECK(slurp(c.out) == a);
    CHECK(fs::exists(scratch_dir() / "verify_a.json.meta.json"));
}

TEST_CASE("verify report contents and JSON round trip") {
    ExperimentConfig c;
    c.mode = Mode::Verify;
    c.n = 120;
    c.dims = {60, 80, 60};
    c.trials = 4;
    c.seed = 9;
    c.ks_tolerance = 0.2;
    const VerifyReport r = run_verify(c);
    REQUIRE(r.ks.size() == 2);
    CHECK(r.ks[0].label == "radial");
    CHECK(r.ks[1].label == "angular");
    CHECK(r.ks[0].sample_size == 240);
    REQUIRE(r.moments.size() == 2);
    CHECK(r.moments[0].analytic == doctest::Approx(1.0 / (2.0 * 1.5)));
    CHECK_FALSE(r.series.empty());
    CHECK(r.support.eigenvalue_count == 240);
    CHECK(r.support.radius == doctest::Approx(1.0 / std::sqrt(3.0)));
    CHECK(r.timings.total_seconds > 0.0);
    CHECK_FALSE(r.timings.timestamp.empty());

    nlohmann::json full = report_json(r);
    full["timings"] = timings_json(r.timings);
    const VerifyReport back = report_from_json(nlohmann::json::parse(full.dump()));
    CHECK(report_json(back) == report_json(r));
    CHECK(timings_json(back.timings) == timings_json(r.timings));
    CHECK(back.config == r.config);
    CHECK(back.ks[0].statistic == r.ks[0].statistic);
    CHECK(back.ks[0].tolerance == r.ks[0].tolerance);
    CHECK(back.ks[1].within_tolerance == r.ks[1].within_tolerance);
    CHECK(back.moments[1].z_score == r.moments[1].z_score);

    nlohmann::json wrong = report_json(r);
    wrong["schema_version"] = 99;
    CHECK_THROWS_AS(report_from_json(wrong), std::invalid_argument);
}

TEST_CASE("verify fails on an impossible tolerance") {
    ExperimentConfig c;
    c.mode = Mode::Verify;
    c.n = 60;
    c.dims = {30, 30};
    c.trials = 2;
    c.ks_tolerance = 1e-6;
    c.out = scratch_dir() / "fail.json";
    CHECK(run_quiet(c) == 1);
}

TEST_CASE("cli_main exit codes") {
    std::ostringstream out, err;
    CHECK(cli_main({"haarprod", "verify", "--n", "8", "--dims", "6,4"}, out, err) == 2);
    CHECK(err.str().find("dims") != std::string::npos);
    CHECK(cli_main({"haarprod", "nonsense"}, out, err) == 2);
    const std::string path = (scratch_dir() / "cli_cdf.csv").string();
    CHECK(cli_main({"haarprod", "analytic-cdf", "--alphas", "3", "--grid", "5", "--out", path}, out, err) == 0);
    CHECK(cli_main({"haarprod", "series-check", "--help"}, out, err) == 0);
}

TEST_CASE("installed binary") {
    const char* cli = std::getenv("HAARPROD_CLI");
    if (cli == nullptr) {
        MESSAGE("HAARPROD_CLI not set; skipped");
        return;
    }
    auto status = [&](const std::string& args) {
        const int raw = std::system((std::string(cli) + " " + args + " >/dev/null 2>&1").c_str());
        return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    };
    const fs::path dir = scratch_dir() / "cli_out";
    fs::remove_all(dir);
    ::setenv("HAARPROD_OUT_DIR", dir.c_str(), 1);
    CHECK(status("series-check --alphas 2,2") == 0);
    ::unsetenv("HAARPROD_OUT_DIR");
    CHECK(fs::exists(dir / "series_check.csv"));
    CHECK(status("verify --n 10 --dims 3,5") == 2);
    CHECK(status("analytic-cdf --alphas 1") == 2);
}
