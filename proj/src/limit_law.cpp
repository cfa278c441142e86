#include "haarprod/limit_law.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace haarprod {

namespace {

// Smallest CDF value resolved by inversion; below it cdf returns 0.
constexpr double kMinCdfX = 1e-12;
// Lower end of the initial bracket for x = 1 + w.
constexpr double kBracketFloor = 1e-15;
constexpr int kMaxRootIterations = 200;

void check_equal_alpha_params(double alpha, int k, const char* op) {
    if (!(alpha > 1.0) || !std::isfinite(alpha)) {
        throw std::invalid_argument(std::string(op) + ": alpha must be finite and > 1");
    }
    if (k < 1) throw std::invalid_argument(std::string(op) + ": k must be >= 1");
}

}  // namespace

RadialLaw::RadialLaw(std::vector<double> alphas) : alphas_(std::move(alphas)) {
    if (alphas_.empty()) throw std::invalid_argument("RadialLaw: need at least one aspect ratio");
    for (double a : alphas_) {
        if (!std::isfinite(a) || a < 1.0) {
            throw std::invalid_argument("RadialLaw: aspect ratios must be finite and >= 1");
        }
    }
    if (!std::is_sorted(alphas_.begin(), alphas_.end(), std::greater<>())) {
        std::sort(alphas_.begin(), alphas_.end(), std::greater<>());
        reordered_ = true;
        warning_ = "aspect ratios re-sorted so that alpha_1 is the largest";
    }
    equal_alpha_ = alphas_.front() == alphas_.back();
    analytic_ = alphas_.back() > 1.0;
    alpha_product_ = std::accumulate(alphas_.begin(), alphas_.end(), 1.0, std::multiplies<>());
    support_radius_ = 1.0 / std::sqrt(alpha_product_);
    if (analytic_) zero_radius_ = 1.0 / std::sqrt(s_of_x(kMinCdfX));
}

double RadialLaw::s_of_x(double x) const noexcept {
    const double a1 = alphas_.front();
    double s = 1.0;
    for (double a : alphas_) s *= a * (a1 - 1.0 + x) / (a1 - a + a * x);
    return s;
}

double RadialLaw::dlog_s_of_x(double x) const noexcept {
    const double a1 = alphas_.front();
    double d = 0.0;
    for (double a : alphas_) d += 1.0 / (a1 - 1.0 + x) - a / (a1 - a + a * x);
    return d;
}

void RadialLaw::require_analytic(const char* op) const {
    if (!analytic_) {
        throw std::domain_error(std::string("RadialLaw::") + op + ": requires every aspect ratio > 1");
    }
}

double RadialLaw::s_eval(double w) const {
    require_analytic("s_eval");
    if (!(w > -1.0 && w <= 0.0)) throw std::domain_error("RadialLaw::s_eval: w must lie in (-1, 0]");
    return s_of_x(1.0 + w);
}

double RadialLaw::s_derivative(double w) const {
    require_analytic("s_derivative");
    if (!(w > -1.0 && w <= 0.0)) throw std::domain_error("RadialLaw::s_derivative: w must lie in (-1, 0]");
    const double x = 1.0 + w;
    return s_of_x(x) * dlog_s_of_x(x);
}

double RadialLaw::solve_x(double s) const {
    // Root of g(y) = log S(e^y) - log s on y = log x <= 0. Near x = 0,
    // log S is close to linear in y, so Newton in y converges fast where
    // Newton in x would stall; bisection in y safeguards it.
    const double log_s = std::log(s);
    auto g = [&](double y) { return std::log(s_of_x(std::exp(y))) - log_s; };

    double lo = std::log(kBracketFloor);
    while (g(lo) < 0.0) {
        lo *= 2.0;
        if (lo < std::log(std::numeric_limits<double>::min())) return 0.0;
    }
    double hi = 0.0;
    if (g(hi) >= 0.0) return 1.0;

    double y = 0.5 * (lo + hi);
    for (int it = 0; it < kMaxRootIterations; ++it) {
        const double gy = g(y);
        if (std::abs(gy) <= 1e-14) break;
        if (gy > 0.0) {
            lo = y;
        } else {
            hi = y;
        }
        const double x = std::exp(y);
        const double slope = x * dlog_s_of_x(x);
        double next = slope != 0.0 ? y - gy / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == y || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(lo)) {
            y = next;
            break;
        }
        y = next;
    }
    return std::exp(y);
}

double RadialLaw::s_inverse(double s) const {
    require_analytic("s_inverse");
    if (std::isnan(s)) throw std::domain_error("RadialLaw::s_inverse: NaN argument");
    if (s < alpha_product_ * (1.0 - 4.0 * std::numeric_limits<double>::epsilon())) {
        throw std::range_error("RadialLaw::s_inverse: value below the range of S (prod alpha_i)");
    }
    if (s <= alpha_product_) return 0.0;
    return solve_x(s) - 1.0;
}

double RadialLaw::cdf(double t) const {
    require_analytic("cdf");
    if (std::isnan(t) || t < 0.0) throw std::domain_error("RadialLaw::cdf: t must be >= 0");
    if (t >= support_radius_) return 1.0;
    if (t <= zero_radius_) return 0.0;
    return solve_x(1.0 / (t * t));
}

double RadialLaw::pdf(double t) const {
    require_analytic("pdf");
    if (std::isnan(t)) throw std::domain_error("RadialLaw::pdf: NaN argument");
    if (!(t > 0.0 && t < support_radius_)) return 0.0;
    if (equal_alpha_) return pdf_radial_equal_alpha(alphas_.front(), k(), t);
    const double h = 1e-6 * support_radius_;
    const double left = std::max(0.0, t - h);
    const double right = std::min(support_radius_, t + h);
    return (cdf(right) - cdf(left)) / (right - left);
}

double RadialLaw::quantile(double p) const {
    require_analytic("quantile");
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("RadialLaw::quantile: p must lie in [0, 1]");
    if (p == 0.0) return 0.0;
    if (p == 1.0) return support_radius_;
    return 1.0 / std::sqrt(s_of_x(p));
}

double RadialLaw::squared_radius_cdf(double u) const {
    if (std::isnan(u) || u < 0.0) throw std::domain_error("RadialLaw::squared_radius_cdf: u must be >= 0");
    return cdf(std::sqrt(u));
}

double cdf_equal_alpha(double alpha, int k, double t) {
    check_equal_alpha_params(alpha, k, "cdf_equal_alpha");
    if (std::isnan(t)) throw std::domain_error("cdf_equal_alpha: NaN argument");
    if (t <= 0.0) return 0.0;
    const double u = std::pow(t, 2.0 / k);
    // Edge inputs such as 1/sqrt(2) are rounded; snap the last few ulps to 1.
    if (alpha * u >= 1.0 - 4.0 * std::numeric_limits<double>::epsilon()) return 1.0;
    return std::min(1.0, (alpha - 1.0) * u / (1.0 - u));
}

double pdf_radial_equal_alpha(double alpha, int k, double t) {
    check_equal_alpha_params(alpha, k, "pdf_radial_equal_alpha");
    if (!(t > 0.0 && t < std::pow(alpha, -0.5 * k))) return 0.0;
    const double u = std::pow(t, 2.0 / k);
    return 2.0 * (alpha - 1.0) / k * (u / t) / ((1.0 - u) * (1.0 - u));
}

double density_polar_equal_alpha(double alpha, int k, double r) {
    return pdf_radial_equal_alpha(alpha, k, r) / (2.0 * std::numbers::pi);
}

double radius_from_uniform(double alpha, int k, double u) {
    if (!(alpha >= 1.0) || !std::isfinite(alpha)) throw std::invalid_argument("radius_from_uniform: alpha must be >= 1");
    if (k < 1) throw std::invalid_argument("radius_from_uniform: k must be >= 1");
    if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("radius_from_uniform: u must lie in [0, 1]");
    if (alpha == 1.0) return 1.0;
    return std::pow(u / (alpha - 1.0 + u), 0.5 * k);
}

std::vector<Complex> exact_sample(double alpha, int k, std::size_t count, RngStream& stream) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> angle(0.0, two_pi);
    auto& engine = stream.engine();
    std::vector<Complex> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double r = radius_from_uniform(alpha, k, unit(engine));
        double theta = angle(engine);
        if (theta >= two_pi) theta = 0.0;
        out.push_back(std::polar(r, theta));
    }
    return out;
}

}  // namespace haarprod
