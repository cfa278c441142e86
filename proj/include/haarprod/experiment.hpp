#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "haarprod/haar_sampler.hpp"
#include "haarprod/series.hpp"
#include "haarprod/spectra.hpp"
#include "haarprod/stats.hpp"

namespace haarprod {

enum class Mode { SampleEigs, AnalyticCdf, ExactSample, Verify, SeriesCheck };

std::string_view mode_name(Mode mode);
/// Throws ConfigError for an unknown name.
Mode parse_mode(std::string_view name);

/// Invalid configuration; field() names the offending key.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& message);
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

inline constexpr int kReportSchemaVersion = 1;
inline constexpr double kSeriesTolerance = 1e-11;
inline constexpr int kSeriesThrough = 12;

struct ExperimentConfig {
    Mode mode = Mode::Verify;
    int n = 0;              ///< ambient dimension; 0 when only alphas are given
    std::vector<int> dims;  ///< n_1 ... n_{k+1}
    /// Aspect ratios for the analytic modes when no matrix dimensions are
    /// given. Ignored when dims is set.
    std::vector<double> alphas;
    int trials = 1;
    std::uint64_t seed = 0;
    double delta = 0.001;
    int grid_points = 101;
    std::size_t count = 100000;  ///< exact-sample draws
    int workers = 1;
    int moment_order = 2;
    int series_order = 16;
    std::optional<double> ks_tolerance;
    std::filesystem::path out;  ///< empty: default name in the output directory

    /// Aspect ratios from dims when present, otherwise alphas.
    std::vector<double> resolved_alphas() const;
    AspectConfig aspect() const;  ///< requires n and dims
    bool operator==(const ExperimentConfig&) const = default;
};

/// Checks everything the mode needs before any work is done.
void validate(const ExperimentConfig& config);

nlohmann::json to_json(const ExperimentConfig& config);
/// Overlays the keys present in j onto base. Unknown keys are errors.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
ExperimentConfig load_config_file(const std::filesystem::path& path, ExperimentConfig base = {});

/// Parses a full command line (argv[0] is skipped): subcommand, --config
/// file, then flag overrides. Throws ConfigError; --help is reported through
/// HelpRequested.
struct HelpRequested {
    std::string text;
};
ExperimentConfig parse_command_line(const std::vector<std::string>& args);

/// Output path for the mode: config.out, or a default file name inside
/// $HAARPROD_OUT_DIR (current directory when unset).
std::filesystem::path output_path(const ExperimentConfig& config);

struct SupportStats {
    double radius = 0.0;  ///< 1 / sqrt(prod alpha_i)
    double max_radius = 0.0;
    double max_overshoot = 0.0;  ///< max(0, max_radius - radius)
    double fraction_outside = 0.0;
    std::size_t eigenvalue_count = 0;
    std::size_t zero_count = 0;
};

struct PhaseTimings {
    double sample_seconds = 0.0;
    double ks_seconds = 0.0;
    double moments_seconds = 0.0;
    double series_seconds = 0.0;
    double total_seconds = 0.0;
    std::string timestamp;  ///< UTC, ISO 8601
};

struct VerifyReport {
    int schema_version = kReportSchemaVersion;
    ExperimentConfig config;
    std::vector<KsReport> ks;
    std::vector<MomentRow> moments;
    std::vector<SeriesCheckRow> series;
    SupportStats support;
    bool pass = false;
    PhaseTimings timings;  ///< written to the sidecar, not the report body
};

/// Report body; byte-stable for a given config.
nlohmann::json report_json(const VerifyReport& report);
nlohmann::json timings_json(const PhaseTimings& timings);
/// Accepts a report body, optionally with a "timings" object merged in.
VerifyReport report_from_json(const nlohmann::json& j);

SupportStats support_stats(const EigenSample& sample, double radius);

VerifyReport run_verify(const ExperimentConfig& config);

/// Runs the configured mode and writes its artifact. Returns the exit status
/// (0 ok, 1 verify failed).
int run(const ExperimentConfig& config, std::ostream& log);

/// Whole CLI: parse, run, map errors to exit codes (2 config, 3 numerical).
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace haarprod
