#include "haarprod/experiment.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "haarprod/errors.hpp"
#include "haarprod/limit_law.hpp"
#include "haarprod/rng.hpp"

namespace haarprod {

namespace {

using nlohmann::json;

constexpr std::array<std::pair<Mode, std::string_view>, 5> kModes{{
    {Mode::SampleEigs, "sample-eigs"},
    {Mode::AnalyticCdf, "analytic-cdf"},
    {Mode::ExactSample, "exact-sample"},
    {Mode::Verify, "verify"},
    {Mode::SeriesCheck, "series-check"},
}};

bool needs_matrices(Mode m) { return m == Mode::SampleEigs || m == Mode::Verify; }
bool needs_analytic_law(Mode m) { return m == Mode::AnalyticCdf || m == Mode::Verify || m == Mode::SeriesCheck; }

std::string fmt_real(double x) {
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", x);
    return buf.data();
}

class Stopwatch {
public:
    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::array<char, 32> buf{};
    std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf.data();
}

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return f;
}

template <class T>
void read_key(const json& j, const char* key, T& into) {
    try {
        into = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(key, e.what());
    }
}

}  // namespace

std::string_view mode_name(Mode mode) {
    for (const auto& [m, name] : kModes) {
        if (m == mode) return name;
    }
    return "unknown";
}

Mode parse_mode(std::string_view name) {
    for (const auto& [m, n] : kModes) {
        if (n == name) return m;
    }
    throw ConfigError("mode", "unknown mode '" + std::string(name) + "'");
}

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

std::vector<double> ExperimentConfig::resolved_alphas() const {
    if (!dims.empty()) return aspect().alphas();
    return alphas;
}

AspectConfig ExperimentConfig::aspect() const {
    try {
        return AspectConfig(n, dims);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("dims", e.what());
    }
}

void validate(const ExperimentConfig& c) {
    if (!c.dims.empty()) {
        c.aspect();
    } else if (needs_matrices(c.mode)) {
        throw ConfigError("dims", "mode " + std::string(mode_name(c.mode)) + " needs --n and --dims");
    } else if (c.alphas.empty()) {
        throw ConfigError("alphas", "give either --n/--dims or --alphas");
    }
    if (c.dims.empty()) {
        for (double a : c.alphas) {
            if (!(a >= 1.0) || !std::isfinite(a)) throw ConfigError("alphas", "aspect ratios must be finite and >= 1");
        }
    }
    const std::vector<double> alphas = c.resolved_alphas();
    if (needs_analytic_law(c.mode)) {
        const double a1 = *std::max_element(alphas.begin(), alphas.end());
        if (!(a1 > 1.0)) throw ConfigError("dims", "analytic modes need alpha_1 > 1");
        if (std::any_of(alphas.begin(), alphas.end(), [](double a) { return !(a > 1.0); })) {
            throw ConfigError("dims", "the analytic law needs every alpha_i > 1");
        }
    }
    if (c.mode == Mode::ExactSample &&
        std::any_of(alphas.begin(), alphas.end(), [&](double a) { return a != alphas.front(); })) {
        throw ConfigError("alphas", "exact-sample needs equal aspect ratios");
    }
    if (c.trials < 1) throw ConfigError("trials", "must be >= 1");
    if (!(c.delta > 0.0 && c.delta < 1.0)) throw ConfigError("delta", "must lie in (0, 1)");
    if (c.grid_points < 2) throw ConfigError("grid_points", "must be >= 2");
    if (c.count < 1) throw ConfigError("count", "must be >= 1");
    if (c.workers < 1) throw ConfigError("workers", "must be >= 1");
    if (c.series_order < 2) throw ConfigError("series_order", "must be >= 2");
    if (c.moment_order < 0 || c.moment_order > c.series_order) {
        throw ConfigError("moment_order", "must lie in [0, series_order]");
    }
    if (c.mode == Mode::Verify && c.moment_order > 0 && c.trials < 2) {
        throw ConfigError("trials", "verify with moments needs at least 2 trials");
    }
    if (c.ks_tolerance && !(*c.ks_tolerance > 0.0)) throw ConfigError("ks_tolerance", "must be > 0");
}

json to_json(const ExperimentConfig& c) {
    json j;
    j["mode"] = std::string(mode_name(c.mode));
    j["n"] = c.n;
    j["dims"] = c.dims;
    j["alphas"] = c.alphas;
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    j["delta"] = c.delta;
    j["grid_points"] = c.grid_points;
    j["count"] = c.count;
    j["workers"] = c.workers;
    j["moment_order"] = c.moment_order;
    j["series_order"] = c.series_order;
    j["ks_tolerance"] = c.ks_tolerance ? json(*c.ks_tolerance) : json(nullptr);
    j["out"] = c.out.string();
    return j;
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig c) {
    if (!j.is_object()) throw ConfigError("config", "top level must be an object");
    for (const auto& [key, value] : j.items()) {
        if (key == "mode") {
            std::string name;
            read_key(j, "mode", name);
            c.mode = parse_mode(name);
        } else if (key == "n") {
            read_key(j, "n", c.n);
        } else if (key == "dims") {
            read_key(j, "dims", c.dims);
        } else if (key == "alphas") {
            read_key(j, "alphas", c.alphas);
        } else if (key == "trials") {
            read_key(j, "trials", c.trials);
        } else if (key == "seed") {
            read_key(j, "seed", c.seed);
        } else if (key == "delta") {
            read_key(j, "delta", c.delta);
        } else if (key == "grid_points") {
            read_key(j, "grid_points", c.grid_points);
        } else if (key == "count") {
            read_key(j, "count", c.count);
        } else if (key == "workers") {
            read_key(j, "workers", c.workers);
        } else if (key == "moment_order") {
            read_key(j, "moment_order", c.moment_order);
        } else if (key == "series_order") {
            read_key(j, "series_order", c.series_order);
        } else if (key == "ks_tolerance") {
            if (value.is_null()) {
                c.ks_tolerance.reset();
            } else {
                double t = 0.0;
                read_key(j, "ks_tolerance", t);
                c.ks_tolerance = t;
            }
        } else if (key == "out") {
            std::string out;
            read_key(j, "out", out);
            c.out = out;
        } else {
            throw ConfigError(key, "unknown configuration key");
        }
    }
    return c;
}

ExperimentConfig load_config_file(const std::filesystem::path& path, ExperimentConfig base) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config", "cannot read " + path.string());
    json j;
    try {
        j = json::parse(f);
    } catch (const json::parse_error& e) {
        throw ConfigError("config", path.string() + ": " + e.what());
    }
    return config_from_json(j, std::move(base));
}

ExperimentConfig parse_command_line(const std::vector<std::string>& args) {
    CLI::App app{"Spectra of products of truncated Haar unitaries"};
    app.require_subcommand(1, 1);

    std::string config_file;
    int n = 0;
    std::vector<int> dims;
    std::vector<double> alphas;
    int trials = 0;
    std::uint64_t seed = 0;
    double delta = 0.0;
    int grid = 0;
    std::size_t count = 0;
    int workers = 0;
    int moments = 0;
    int order = 0;
    double ks_tolerance = 0.0;
    std::string out;

    std::vector<CLI::App*> subs;
    for (const auto& [mode, name] : kModes) {
        CLI::App* sub = app.add_subcommand(std::string(name));
        sub->add_option("--config", config_file, "JSON configuration file; flags override it");
        sub->add_option("--n", n, "ambient dimension");
        sub->add_option("--dims", dims, "block dimensions n_1,...,n_{k+1}")->delimiter(',');
        sub->add_option("--alphas", alphas, "aspect ratios, when no dimensions are given")->delimiter(',');
        sub->add_option("--trials", trials, "independent products");
        sub->add_option("--seed", seed, "master seed");
        sub->add_option("--delta", delta, "KS confidence parameter");
        sub->add_option("--grid", grid, "analytic-cdf grid points");
        sub->add_option("--count", count, "exact-sample draws");
        sub->add_option("--workers", workers, "worker threads");
        sub->add_option("--moments", moments, "trace moments to compare (verify)");
        sub->add_option("--order", order, "series truncation order");
        sub->add_option("--ks-tolerance", ks_tolerance, "finite-n KS tolerance (verify)");
        sub->add_option("--out", out, "output file");
        subs.push_back(sub);
    }

    std::vector<std::string> reversed(args.begin() + (args.empty() ? 0 : 1), args.end());
    std::reverse(reversed.begin(), reversed.end());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested{app.help()};
    } catch (const CLI::ParseError& e) {
        throw ConfigError("command line", e.what());
    }

    CLI::App* chosen = app.get_subcommands().front();
    ExperimentConfig c;
    if (chosen->count("--config") > 0) c = load_config_file(config_file);
    c.mode = parse_mode(chosen->get_name());

    auto given = [&](const char* flag) { return chosen->count(flag) > 0; };
    if (given("--n")) c.n = n;
    if (given("--dims")) c.dims = dims;
    if (given("--alphas")) c.alphas = alphas;
    if (given("--trials")) c.trials = trials;
    if (given("--seed")) c.seed = seed;
    if (given("--delta")) c.delta = delta;
    if (given("--grid")) c.grid_points = grid;
    if (given("--count")) c.count = count;
    if (given("--workers")) c.workers = workers;
    if (given("--moments")) c.moment_order = moments;
    if (given("--order")) c.series_order = order;
    if (given("--ks-tolerance")) c.ks_tolerance = ks_tolerance;
    if (given("--out")) c.out = out;
    return c;
}

std::filesystem::path output_path(const ExperimentConfig& c) {
    if (!c.out.empty()) return c.out;
    std::filesystem::path dir = ".";
    if (const char* env = std::getenv("HAARPROD_OUT_DIR"); env != nullptr && *env != '\0') dir = env;
    switch (c.mode) {
        case Mode::SampleEigs: return dir / "eigenvalues.csv";
        case Mode::AnalyticCdf: return dir / "cdf.csv";
        case Mode::ExactSample: return dir / "exact_sample.csv";
        case Mode::Verify: return dir / "verify.json";
        case Mode::SeriesCheck: return dir / "series_check.csv";
    }
    return dir / "out";
}

json timings_json(const PhaseTimings& t) {
    return json{{"sample_seconds", t.sample_seconds},   {"ks_seconds", t.ks_seconds},
                {"moments_seconds", t.moments_seconds}, {"series_seconds", t.series_seconds},
                {"total_seconds", t.total_seconds},     {"timestamp", t.timestamp}};
}

json report_json(const VerifyReport& r) {
    json ks = json::array();
    for (const KsReport& k : r.ks) {
        ks.push_back({{"label", k.label},
                      {"statistic", k.statistic},
                      {"sample_size", k.sample_size},
                      {"delta", k.delta},
                      {"threshold", k.threshold},
                      {"pass", k.pass},
                      {"tolerance", k.tolerance ? json(*k.tolerance) : json(nullptr)},
                      {"within_tolerance", k.within_tolerance ? json(*k.within_tolerance) : json(nullptr)},
                      {"excluded", k.excluded}});
    }
    json moments = json::array();
    for (const MomentRow& m : r.moments) {
        moments.push_back({{"p", m.p},
                           {"empirical", m.empirical},
                           {"analytic", m.analytic},
                           {"std_error", m.std_error},
                           {"z_score", m.z_score}});
    }
    json series = json::array();
    for (const SeriesCheckRow& s : r.series) {
        series.push_back({{"check", s.check}, {"index", s.index}, {"residual", s.residual}});
    }
    const SupportStats& s = r.support;
    return json{{"schema_version", r.schema_version},
                {"config", to_json(r.config)},
                {"ks", ks},
                {"moments", moments},
                {"series", series},
                {"support",
                 {{"radius", s.radius},
                  {"max_radius", s.max_radius},
                  {"max_overshoot", s.max_overshoot},
                  {"fraction_outside", s.fraction_outside},
                  {"eigenvalue_count", s.eigenvalue_count},
                  {"zero_count", s.zero_count}}},
                {"pass", r.pass}};
}

VerifyReport report_from_json(const json& j) {
    VerifyReport r;
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kReportSchemaVersion) {
        throw std::invalid_argument("unsupported report schema version " + std::to_string(r.schema_version));
    }
    r.config = config_from_json(j.at("config"));
    for (const json& k : j.at("ks")) {
        KsReport ks;
        ks.label = k.at("label").get<std::string>();
        ks.statistic = k.at("statistic").get<double>();
        ks.sample_size = k.at("sample_size").get<std::size_t>();
        ks.delta = k.at("delta").get<double>();
        ks.threshold = k.at("threshold").get<double>();
        ks.pass = k.at("pass").get<bool>();
        if (!k.at("tolerance").is_null()) ks.tolerance = k.at("tolerance").get<double>();
        if (!k.at("within_tolerance").is_null()) ks.within_tolerance = k.at("within_tolerance").get<bool>();
        ks.excluded = k.at("excluded").get<std::size_t>();
        r.ks.push_back(std::move(ks));
    }
    for (const json& m : j.at("moments")) {
        r.moments.push_back({m.at("p").get<int>(), m.at("empirical").get<double>(), m.at("analytic").get<double>(),
                             m.at("std_error").get<double>(), m.at("z_score").get<double>()});
    }
    for (const json& s : j.at("series")) {
        r.series.push_back({s.at("check").get<std::string>(), s.at("index").get<int>(), s.at("residual").get<double>()});
    }
    const json& s = j.at("support");
    r.support.radius = s.at("radius").get<double>();
    r.support.max_radius = s.at("max_radius").get<double>();
    r.support.max_overshoot = s.at("max_overshoot").get<double>();
    r.support.fraction_outside = s.at("fraction_outside").get<double>();
    r.support.eigenvalue_count = s.at("eigenvalue_count").get<std::size_t>();
    r.support.zero_count = s.at("zero_count").get<std::size_t>();
    r.pass = j.at("pass").get<bool>();
    if (j.contains("timings")) {
        const json& t = j.at("timings");
        r.timings.sample_seconds = t.at("sample_seconds").get<double>();
        r.timings.ks_seconds = t.at("ks_seconds").get<double>();
        r.timings.moments_seconds = t.at("moments_seconds").get<double>();
        r.timings.series_seconds = t.at("series_seconds").get<double>();
        r.timings.total_seconds = t.at("total_seconds").get<double>();
        r.timings.timestamp = t.at("timestamp").get<std::string>();
    }
    return r;
}

SupportStats support_stats(const EigenSample& sample, double radius) {
    SupportStats s;
    s.radius = radius;
    s.eigenvalue_count = sample.size();
    s.zero_count = sample.zero_count;
    std::size_t outside = 0;
    for (double r : sample.radii) {
        s.max_radius = std::max(s.max_radius, r);
        if (r > radius) ++outside;
    }
    s.max_overshoot = std::max(0.0, s.max_radius - radius);
    if (!sample.radii.empty()) s.fraction_outside = static_cast<double>(outside) / static_cast<double>(sample.size());
    return s;
}

VerifyReport run_verify(const ExperimentConfig& config) {
    validate(config);
    Stopwatch clock;
    VerifyReport report;
    report.config = config;
    report.timings.timestamp = utc_timestamp();
    const AspectConfig aspect = config.aspect();
    const RadialLaw law(aspect);

    SampleOptions options;
    options.workers = config.workers;
    options.moment_order = config.moment_order;
    const EigenSample sample = collect_sample(aspect, config.trials, config.seed, options);
    report.timings.sample_seconds = clock.lap();

    report.ks.push_back(ks_radial(sample, law, config.delta, config.ks_tolerance));
    report.ks.push_back(ks_angular(sample, config.delta, config.ks_tolerance));
    report.support = support_stats(sample, law.support_radius());
    report.timings.ks_seconds = clock.lap();

    if (config.moment_order > 0) report.moments = moment_report(sample.trace_moments, law, config.moment_order);
    report.timings.moments_seconds = clock.lap();

    const int through = std::min(kSeriesThrough, config.series_order - 1);
    report.series = series_check_report(law.alphas(), config.series_order, through);
    report.timings.series_seconds = clock.lap();

    bool pass = true;
    for (const KsReport& k : report.ks) pass = pass && k.within_tolerance.value_or(k.pass);
    for (const SeriesCheckRow& s : report.series) pass = pass && s.residual <= kSeriesTolerance;
    report.pass = pass;
    report.timings.total_seconds = report.timings.sample_seconds + report.timings.ks_seconds +
                                   report.timings.moments_seconds + report.timings.series_seconds;
    return report;
}

int run(const ExperimentConfig& config, std::ostream& log) {
    validate(config);
    const std::filesystem::path path = output_path(config);

    switch (config.mode) {
        case Mode::SampleEigs: {
            SampleOptions options;
            options.workers = config.workers;
            const EigenSample s = collect_sample(config.aspect(), config.trials, config.seed, options);
            std::ofstream f = open_output(path);
            f << "trial,re,im,radius,angle\n";
            for (std::size_t i = 0; i < s.size(); ++i) {
                f << s.trial[i] << ',' << fmt_real(s.eigenvalues[i].real()) << ',' << fmt_real(s.eigenvalues[i].imag())
                  << ',' << fmt_real(s.radii[i]) << ',' << fmt_real(s.angles[i]) << '\n';
            }
            log << "wrote " << s.size() << " eigenvalues to " << path.string() << '\n';
            return 0;
        }
        case Mode::AnalyticCdf: {
            const RadialLaw law(config.resolved_alphas());
            const double radius = law.support_radius();
            std::ofstream f = open_output(path);
            f << (law.equal_alpha() ? "t,cdf,pdf\n" : "t,cdf\n");
            const int last = config.grid_points - 1;
            for (int i = 0; i <= last; ++i) {
                const double t = i == last ? radius : radius * i / last;
                f << fmt_real(t) << ',' << fmt_real(law.cdf(t));
                if (law.equal_alpha()) f << ',' << fmt_real(law.pdf(t));
                f << '\n';
            }
            log << "wrote " << config.grid_points << " grid points to " << path.string() << '\n';
            return 0;
        }
        case Mode::ExactSample: {
            const std::vector<double> alphas = config.resolved_alphas();
            RngStream stream(config.seed);
            const auto draws = exact_sample(alphas.front(), static_cast<int>(alphas.size()), config.count, stream);
            std::ofstream f = open_output(path);
            f << "index,re,im,radius,angle\n";
            for (std::size_t i = 0; i < draws.size(); ++i) {
                const Complex z = draws[i];
                double theta = std::arg(z);
                if (theta < 0.0) theta += 2.0 * std::numbers::pi;
                f << i << ',' << fmt_real(z.real()) << ',' << fmt_real(z.imag()) << ',' << fmt_real(std::abs(z)) << ','
                  << fmt_real(theta) << '\n';
            }
            log << "wrote " << draws.size() << " draws to " << path.string() << '\n';
            return 0;
        }
        case Mode::SeriesCheck: {
            const RadialLaw law(config.resolved_alphas());
            const int through = std::min(kSeriesThrough, config.series_order - 1);
            const auto rows = series_check_report(law.alphas(), config.series_order, through);
            std::ofstream f = open_output(path);
            f << "check,index,max_residual\n";
            double worst = 0.0;
            for (const SeriesCheckRow& r : rows) {
                f << r.check << ',' << r.index << ',' << fmt_real(r.residual) << '\n';
                worst = std::max(worst, r.residual);
            }
            log << "max residual " << fmt_real(worst) << " through order " << through << ", wrote " << path.string()
                << '\n';
            return 0;
        }
        case Mode::Verify: {
            const VerifyReport report = run_verify(config);
            {
                std::ofstream f = open_output(path);
                f << report_json(report).dump(2) << '\n';
            }
            {
                std::filesystem::path meta = path;
                meta += ".meta.json";
                std::ofstream f = open_output(meta);
                f << timings_json(report.timings).dump(2) << '\n';
            }
            for (const KsReport& k : report.ks) {
                log << k.label << " KS " << fmt_real(k.statistic) << " (DKW " << fmt_real(k.threshold);
                if (k.tolerance) log << ", tolerance " << fmt_real(*k.tolerance);
                log << ")\n";
            }
            log << (report.pass ? "PASS" : "FAIL") << ", wrote " << path.string() << '\n';
            return report.pass ? 0 : 1;
        }
    }
    return 0;
}

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        const ExperimentConfig config = parse_command_line(args);
        return run(config, out);
    } catch (const HelpRequested& h) {
        out << h.text;
        return 0;
    } catch (const ConfigError& e) {
        err << "invalid configuration: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 4;
    }
}

}  // namespace haarprod
