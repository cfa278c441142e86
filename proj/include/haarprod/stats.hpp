#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "haarprod/haar_sampler.hpp"
#include "haarprod/limit_law.hpp"
#include "haarprod/spectra.hpp"

namespace haarprod {

/// DKW bound sqrt(ln(2 / delta) / (2 n)): with probability >= 1 - delta the
/// empirical CDF of n i.i.d. draws stays within this sup-distance of the truth.
double dkw_threshold(std::size_t n, double delta);

/// One-sample Kolmogorov-Smirnov statistic sup |F_n - F| for a continuous F.
/// The sample is copied and sorted.
double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf);

/// Asymptotic Kolmogorov survival function P(K > lambda).
double kolmogorov_survival(double lambda);

struct TwoSampleKs {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Two-sample KS test with the asymptotic p-value (Stephens' small-sample
/// correction on the effective size).
TwoSampleKs ks_two_sample(std::span<const double> a, std::span<const double> b);

struct KsReport {
    std::string label;
    double statistic = 0.0;
    std::size_t sample_size = 0;
    double delta = 0.0;
    double threshold = 0.0;  ///< DKW bound at delta
    bool pass = false;       ///< statistic <= threshold
    /// Calibrated finite-n tolerance, when one applies. Matrix ensembles at
    /// finite n carry a bias the DKW bound does not account for.
    std::optional<double> tolerance;
    std::optional<bool> within_tolerance;
    std::size_t excluded = 0;  ///< points dropped (eigenvalues at the origin)
};

/// Builds a report from a statistic; fills pass/threshold from DKW.
KsReport make_ks_report(std::string label, double statistic, std::size_t n, double delta,
                        std::optional<double> tolerance = std::nullopt);

/// KS distance between the pooled radii and law.cdf.
KsReport ks_radial(const EigenSample& sample, const RadialLaw& law, double delta,
                   std::optional<double> tolerance = std::nullopt);

/// KS distance of radii (already clipped to the unit disk) against law.cdf.
KsReport ks_radial(std::span<const double> radii, const RadialLaw& law, double delta,
                   std::optional<double> tolerance = std::nullopt);

/// KS distance of the angles against Uniform[0, 2 pi). Eigenvalues at the
/// origin are excluded and counted; throws std::invalid_argument if nothing
/// is left.
KsReport ks_angular(const EigenSample& sample, double delta, std::optional<double> tolerance = std::nullopt);

/// KS distance of angles in [0, 2 pi) against the uniform law.
KsReport ks_angular(std::span<const double> angles, double delta, std::optional<double> tolerance = std::nullopt);

struct MomentRow {
    int p = 0;
    double empirical = 0.0;  ///< mean of (1/n_1) Tr((BB^*)^p) over trials
    double analytic = 0.0;   ///< limit value from the S-transform series
    double std_error = 0.0;  ///< standard error of the empirical mean
    double z_score = 0.0;    ///< (empirical - analytic) / std_error
};

/// Limit moments phi((aa^*)^p), p = 1..p_max, from the S-transform series of
/// the law's aspect ratios.
std::vector<double> analytic_moments(const RadialLaw& law, int p_max);

/// Compares per-trial trace moments (trace_moments[t][p-1]) with the limit
/// moments. Requires at least two trials and p_max <= series order.
std::vector<MomentRow> moment_report(const std::vector<std::vector<double>>& trace_moments, const RadialLaw& law,
                                     int p_max);

/// Same, computing the trace moments from the product matrices.
std::vector<MomentRow> moment_report(std::span<const ComplexMatrix> products, const RadialLaw& law, int p_max);

}  // namespace haarprod
