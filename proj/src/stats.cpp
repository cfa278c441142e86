#include "haarprod/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "haarprod/series.hpp"

namespace haarprod {

double dkw_threshold(std::size_t n, double delta) {
    if (n == 0) throw std::invalid_argument("dkw_threshold: empty sample");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("dkw_threshold: delta must lie in (0, 1)");
    return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(n)));
}

double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        const double below = static_cast<double>(i) / n;
        const double above = static_cast<double>(i + 1) / n;
        d = std::max({d, f - below, above - f});
    }
    return d;
}

double kolmogorov_survival(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 1.18) {
        // P(K <= lambda) = sqrt(2 pi) / lambda * sum exp(-(2j-1)^2 pi^2 / (8 lambda^2))
        const double c = -std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
        double sum = 0.0;
        for (int j = 1; j <= 8; ++j) {
            const double odd = 2.0 * j - 1.0;
            sum += std::exp(c * odd * odd);
        }
        return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
    }
    double sum = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += (j % 2 == 1 ? term : -term);
        if (term < 1e-18) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

TwoSampleKs ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] <= v) ++i;
        while (j < y.size() && y[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    }
    const double ne = std::sqrt(nx * ny / (nx + ny));
    return {d, kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d)};
}

KsReport make_ks_report(std::string label, double statistic, std::size_t n, double delta,
                        std::optional<double> tolerance) {
    KsReport r;
    r.label = std::move(label);
    r.statistic = statistic;
    r.sample_size = n;
    r.delta = delta;
    r.threshold = dkw_threshold(n, delta);
    r.pass = statistic <= r.threshold;
    r.tolerance = tolerance;
    if (tolerance) r.within_tolerance = statistic <= *tolerance;
    return r;
}

KsReport ks_radial(std::span<const double> radii, const RadialLaw& law, double delta,
                   std::optional<double> tolerance) {
    if (radii.empty()) throw std::invalid_argument("ks_radial: empty sample");
    const double d = ks_statistic(radii, [&law](double t) { return law.cdf(t); });
    return make_ks_report("radial", d, radii.size(), delta, tolerance);
}

KsReport ks_radial(const EigenSample& sample, const RadialLaw& law, double delta, std::optional<double> tolerance) {
    return ks_radial(std::span<const double>(sample.radii), law, delta, tolerance);
}

KsReport ks_angular(std::span<const double> angles, double delta, std::optional<double> tolerance) {
    if (angles.empty()) throw std::invalid_argument("ks_angular: empty sample");
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double d = ks_statistic(angles, [](double theta) { return std::clamp(theta / two_pi, 0.0, 1.0); });
    return make_ks_report("angular", d, angles.size(), delta, tolerance);
}

KsReport ks_angular(const EigenSample& sample, double delta, std::optional<double> tolerance) {
    std::vector<double> angles;
    angles.reserve(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) {
        if (sample.eigenvalues[i] != Complex(0.0, 0.0)) angles.push_back(sample.angles[i]);
    }
    if (angles.empty()) throw std::invalid_argument("ks_angular: every eigenvalue is at the origin");
    KsReport r = ks_angular(std::span<const double>(angles), delta, tolerance);
    r.excluded = sample.size() - angles.size();
    return r;
}

std::vector<double> analytic_moments(const RadialLaw& law, int p_max) {
    if (p_max < 1 || p_max > kDefaultSeriesOrder) {
        throw std::invalid_argument("analytic_moments: p_max must lie in [1, " +
                                    std::to_string(kDefaultSeriesOrder) + "]");
    }
    auto m = moments_from_s(closed_form_s(law.alphas(), kDefaultSeriesOrder));
    m.resize(static_cast<std::size_t>(p_max));
    return m;
}

std::vector<MomentRow> moment_report(const std::vector<std::vector<double>>& trace_moments, const RadialLaw& law,
                                     int p_max) {
    if (trace_moments.size() < 2) throw std::invalid_argument("moment_report: need at least two trials");
    const auto analytic = analytic_moments(law, p_max);
    const double trials = static_cast<double>(trace_moments.size());
    std::vector<MomentRow> rows;
    for (int p = 1; p <= p_max; ++p) {
        const auto idx = static_cast<std::size_t>(p - 1);
        double sum = 0.0;
        for (const auto& t : trace_moments) {
            if (t.size() <= idx) throw std::invalid_argument("moment_report: trial is missing moment p");
            sum += t[idx];
        }
        const double mean = sum / trials;
        double ss = 0.0;
        for (const auto& t : trace_moments) ss += (t[idx] - mean) * (t[idx] - mean);
        const double se = std::sqrt(ss / (trials - 1.0) / trials);
        MomentRow row;
        row.p = p;
        row.empirical = mean;
        row.analytic = analytic[idx];
        row.std_error = se;
        const double diff = mean - row.analytic;
        row.z_score = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff));
        rows.push_back(row);
    }
    return rows;
}

std::vector<MomentRow> moment_report(std::span<const ComplexMatrix> products, const RadialLaw& law, int p_max) {
    std::vector<std::vector<double>> traces;
    traces.reserve(products.size());
    for (const auto& b : products) {
        std::vector<double> row;
        for (int p = 1; p <= p_max; ++p) row.push_back(trace_moment(b, p));
        traces.push_back(std::move(row));
    }
    return moment_report(traces, law, p_max);
}

}  // namespace haarprod
