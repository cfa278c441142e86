#include "haarprod/series.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace haarprod {

namespace {

void require_order(int order) {
    if (order < 0) throw std::invalid_argument("PowerSeries: order must be >= 0");
}

void check_alphas(std::span<const double> alphas, double lower, const char* op) {
    if (alphas.empty()) throw std::invalid_argument(std::string(op) + ": need at least one aspect ratio");
    for (double a : alphas) {
        if (!std::isfinite(a) || a < lower) {
            throw std::invalid_argument(std::string(op) + ": aspect ratios must be finite and >= 1");
        }
    }
}

}  // namespace

PowerSeries::PowerSeries(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) throw std::invalid_argument("PowerSeries: need at least one coefficient");
}

PowerSeries PowerSeries::zero(int order) {
    require_order(order);
    return PowerSeries(std::vector<double>(static_cast<std::size_t>(order) + 1, 0.0));
}

PowerSeries PowerSeries::constant(double c, int order) {
    PowerSeries s = zero(order);
    s.coeffs_[0] = c;
    return s;
}

PowerSeries PowerSeries::identity(int order) { return linear(0.0, 1.0, order); }

PowerSeries PowerSeries::linear(double c0, double c1, int order) {
    PowerSeries s = zero(order);
    s.coeffs_[0] = c0;
    if (order >= 1) s.coeffs_[1] = c1;
    return s;
}

int PowerSeries::valuation() const noexcept {
    for (std::size_t j = 0; j < coeffs_.size(); ++j) {
        if (coeffs_[j] != 0.0) return static_cast<int>(j);
    }
    return order() + 1;
}

PowerSeries PowerSeries::truncated(int order) const {
    require_order(order);
    std::vector<double> c(static_cast<std::size_t>(order) + 1, 0.0);
    std::copy_n(coeffs_.begin(), std::min(c.size(), coeffs_.size()), c.begin());
    return PowerSeries(std::move(c));
}

PowerSeries PowerSeries::derivative() const {
    if (order() == 0) return zero(0);
    std::vector<double> c(coeffs_.size() - 1);
    for (std::size_t j = 1; j < coeffs_.size(); ++j) c[j - 1] = static_cast<double>(j) * coeffs_[j];
    return PowerSeries(std::move(c));
}

PowerSeries PowerSeries::scaled_argument(double c) const {
    std::vector<double> out = coeffs_;
    double power = 1.0;
    for (double& v : out) {
        v *= power;
        power *= c;
    }
    return PowerSeries(std::move(out));
}

double PowerSeries::evaluate(double z) const {
    double r = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) r = r * z + *it;
    return r;
}

PowerSeries operator+(const PowerSeries& a, const PowerSeries& b) {
    const int n = std::min(a.order(), b.order());
    PowerSeries r = PowerSeries::zero(n);
    for (int j = 0; j <= n; ++j) r.coeffs_[static_cast<std::size_t>(j)] = a[j] + b[j];
    return r;
}

PowerSeries operator-(const PowerSeries& a, const PowerSeries& b) {
    const int n = std::min(a.order(), b.order());
    PowerSeries r = PowerSeries::zero(n);
    for (int j = 0; j <= n; ++j) r.coeffs_[static_cast<std::size_t>(j)] = a[j] - b[j];
    return r;
}

PowerSeries operator*(double s, const PowerSeries& a) {
    PowerSeries r = a;
    for (double& v : r.coeffs_) v *= s;
    return r;
}

PowerSeries series_mul(const PowerSeries& a, const PowerSeries& b) {
    const int n = std::min(a.order(), b.order());
    std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
    for (int i = 0; i <= n; ++i) {
        if (a[i] == 0.0) continue;
        for (int j = 0; i + j <= n; ++j) c[static_cast<std::size_t>(i + j)] += a[i] * b[j];
    }
    return PowerSeries(std::move(c));
}

PowerSeries series_div(const PowerSeries& a, const PowerSeries& b) {
    const int vb = b.valuation();
    if (vb > b.order()) throw std::domain_error("series_div: division by the zero series");
    if (a.valuation() < vb) throw std::domain_error("series_div: quotient is not a power series");
    const int n = std::min(a.order(), b.order()) - vb;
    if (n < 0) throw std::domain_error("series_div: no precision left after cancelling powers of z");

    const double lead = b[vb];
    std::vector<double> q(static_cast<std::size_t>(n) + 1, 0.0);
    for (int j = 0; j <= n; ++j) {
        double acc = a[j + vb];
        for (int i = 1; i <= j; ++i) acc -= b[i + vb] * q[static_cast<std::size_t>(j - i)];
        q[static_cast<std::size_t>(j)] = acc / lead;
    }
    return PowerSeries(std::move(q));
}

PowerSeries series_compose(const PowerSeries& a, const PowerSeries& b) {
    if (b[0] != 0.0) throw std::domain_error("series_compose: inner series must have zero constant term");
    const int n = std::min(a.order(), b.order());
    PowerSeries r = PowerSeries::constant(a[n], n);
    const PowerSeries inner = b.truncated(n);
    for (int j = n - 1; j >= 0; --j) {
        r = series_mul(r, inner);
        r = r + PowerSeries::constant(a[j], n);
    }
    return r;
}

TruncatedSeries TruncatedSeries::from_coefficients(std::span<const double> c) {
    std::vector<double> coeffs(c.size() + 1, 0.0);
    std::copy(c.begin(), c.end(), coeffs.begin() + 1);
    return TruncatedSeries(PowerSeries(std::move(coeffs)));
}

TruncatedSeries::TruncatedSeries(PowerSeries s) : series_(std::move(s)) {
    if (series_[0] != 0.0) throw std::invalid_argument("TruncatedSeries: constant term must be zero");
    if (series_.order() < 1) throw std::invalid_argument("TruncatedSeries: order must be >= 1");
}

std::vector<double> TruncatedSeries::coefficients() const {
    return {series_.coeffs().begin() + 1, series_.coeffs().end()};
}

STransformSeries::STransformSeries(PowerSeries s) : series_(std::move(s)) {}

TruncatedSeries comp_inverse(const TruncatedSeries& f) {
    const PowerSeries& fs = f.series();
    const int n = fs.order();
    if (fs[1] == 0.0) throw std::domain_error("comp_inverse: linear coefficient is zero, not invertible");

    const PowerSeries z = PowerSeries::identity(n);
    // f' is known through z^{n-1}; the missing top term only perturbs the
    // Newton step beyond z^n, since the residual has valuation >= 2.
    const PowerSeries df = fs.derivative().truncated(n);
    // g = z / c_1 is exact modulo z^2; each Newton step doubles that.
    PowerSeries g = (1.0 / fs[1]) * z;
    for (int exact = 2; exact <= n; exact *= 2) {
        g = g - series_div(series_compose(fs, g) - z, series_compose(df, g));
    }
    // One more pass to clean up roundoff.
    g = g - series_div(series_compose(fs, g) - z, series_compose(df, g));
    std::vector<double> c = g.coeffs();
    c[0] = 0.0;
    return TruncatedSeries(PowerSeries(std::move(c)));
}

TruncatedSeries m_from_moments(std::span<const double> moments) {
    if (moments.empty()) throw std::invalid_argument("m_from_moments: need at least one moment");
    return TruncatedSeries::from_coefficients(moments);
}

STransformSeries s_transform_of(const TruncatedSeries& m) {
    if (m.coeff(1) == 0.0) throw std::domain_error("s_transform_of: first moment is zero");
    const int n = m.order();
    const PowerSeries inverse = comp_inverse(m).series();
    // M^{-1}(z) / z, order n - 1.
    const std::vector<double> shifted(inverse.coeffs().begin() + 1, inverse.coeffs().end());
    const PowerSeries quotient(shifted);
    return STransformSeries(series_mul(PowerSeries::linear(1.0, 1.0, n - 1), quotient));
}

std::vector<double> moments_from_s(const STransformSeries& s) {
    if (s.coeff(0) == 0.0) throw std::domain_error("moments_from_s: S-transform has zero constant term");
    const int n = s.order();
    // z / (1 + z) * S(z) = z * S(z) / (1 + z), order n.
    const PowerSeries over = series_div(s.series(), PowerSeries::linear(1.0, 1.0, n - 1));
    std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
    std::copy(over.coeffs().begin(), over.coeffs().end(), c.begin() + 1);
    const TruncatedSeries m_inverse{PowerSeries(std::move(c))};
    return comp_inverse(m_inverse).coefficients();
}

TruncatedSeries projection_moment_series(double alpha, int order) {
    if (!(alpha >= 1.0) || !std::isfinite(alpha)) {
        throw std::invalid_argument("projection_moment_series: alpha must be >= 1");
    }
    const std::vector<double> moments(static_cast<std::size_t>(order), 1.0 / alpha);
    return m_from_moments(moments);
}

STransformSeries product_s_check(std::span<const double> alphas, int order) {
    check_alphas(alphas, 1.0, "product_s_check");
    const PowerSeries first = s_transform_of(projection_moment_series(alphas[0], order)).series();
    PowerSeries product = first;
    for (std::size_t i = 1; i < alphas.size(); ++i) {
        product = series_mul(product, s_transform_of(projection_moment_series(alphas[i], order)).series());
    }
    return STransformSeries(series_mul(product, first));
}

namespace {

void check_alpha_one_is_max(std::span<const double> alphas, const char* op) {
    check_alphas(alphas, 1.0, op);
    if (!(alphas[0] > 1.0) || *std::max_element(alphas.begin(), alphas.end()) != alphas[0]) {
        throw std::invalid_argument(std::string(op) + ": alphas[0] must be the largest ratio and > 1");
    }
}

}  // namespace

STransformSeries scaled_s_check(std::span<const double> alphas, int order) {
    check_alpha_one_is_max(alphas, "scaled_s_check");
    const double a1 = alphas[0];
    const PowerSeries ambient = product_s_check(alphas, order).series();
    const int n = ambient.order();
    const PowerSeries prefactor = series_div(PowerSeries::linear(1.0, 1.0, n), PowerSeries::linear(a1, 1.0, n));
    return STransformSeries(series_mul(prefactor, ambient.scaled_argument(1.0 / a1)));
}

std::vector<double> scaled_moments_check(std::span<const double> alphas, int order) {
    check_alpha_one_is_max(alphas, "scaled_moments_check");
    std::vector<double> moments = moments_from_s(product_s_check(alphas, order));
    for (double& m : moments) m *= alphas[0];
    return moments;
}

STransformSeries closed_form_s(std::span<const double> alphas, int order) {
    check_alphas(alphas, 1.0, "closed_form_s");
    const double a1 = alphas[0];
    const int n = order - 1;
    PowerSeries s = PowerSeries::constant(1.0, n);
    for (double a : alphas) {
        const PowerSeries factor =
            series_div(PowerSeries::linear(a * a1, a, n), PowerSeries::linear(a1, a, n));
        s = series_mul(s, factor);
    }
    return STransformSeries(s);
}

STransformSeries projection_s_closed_form(double alpha, int order) {
    const int n = order - 1;
    return STransformSeries(
        series_div(PowerSeries::linear(alpha, alpha, n), PowerSeries::linear(1.0, alpha, n)));
}

double coefficient_residual(const PowerSeries& a, const PowerSeries& b, int through) {
    if (through > a.order() || through > b.order()) {
        throw std::invalid_argument("coefficient_residual: series shorter than the requested order");
    }
    double worst = 0.0;
    for (int j = 0; j <= through; ++j) {
        worst = std::max(worst, std::abs(a[j] - b[j]) / std::max(1.0, std::abs(b[j])));
    }
    return worst;
}

std::vector<SeriesCheckRow> series_check_report(std::span<const double> alphas, int order, int through) {
    check_alpha_one_is_max(alphas, "series_check_report");
    if (through > order - 1) throw std::invalid_argument("series_check_report: through must be < order");
    std::vector<SeriesCheckRow> rows;

    PowerSeries block_product = PowerSeries::constant(1.0, order - 1);
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        const double a = alphas[i];
        const int idx = static_cast<int>(i) + 1;
        const TruncatedSeries m = projection_moment_series(a, order);

        // a z / (1 - z) / a: every coefficient 1 / alpha.
        const PowerSeries m_closed =
            series_div(PowerSeries::linear(0.0, 1.0 / a, order), PowerSeries::linear(1.0, -1.0, order));
        rows.push_back({"projection_m", idx, coefficient_residual(m.series(), m_closed, through)});

        const PowerSeries inv_closed =
            series_div(PowerSeries::linear(0.0, a, order), PowerSeries::linear(1.0, a, order));
        rows.push_back({"projection_m_inverse", idx, coefficient_residual(comp_inverse(m).series(), inv_closed, through)});

        const PowerSeries s_closed = projection_s_closed_form(a, order).series();
        rows.push_back({"projection_s", idx, coefficient_residual(s_transform_of(m).series(), s_closed, through)});

        block_product = series_mul(block_product, s_closed);
        if (i == 0) block_product = series_mul(block_product, s_closed);
    }

    rows.push_back({"product", 0, coefficient_residual(product_s_check(alphas, order).series(), block_product, through)});

    const PowerSeries target = closed_form_s(alphas, order).series();
    rows.push_back({"scaled", 0, coefficient_residual(scaled_s_check(alphas, order).series(), target, through)});
    const std::vector<double> got = scaled_moments_check(alphas, order);
    const std::vector<double> want = moments_from_s(closed_form_s(alphas, order));
    double worst = 0.0;
    for (int p = 0; p < through && p < static_cast<int>(got.size()); ++p) {
        const auto i = static_cast<std::size_t>(p);
        worst = std::max(worst, std::abs(got[i] - want[i]) / std::max(1.0, std::abs(want[i])));
    }
    rows.push_back({"scaled_moments", 0, worst});

    double prod = 1.0;
    for (double a : alphas) prod *= a;
    const double m1 = moments_from_s(closed_form_s(alphas, order)).front();
    rows.push_back({"mean", 0, std::abs(m1 - 1.0 / prod) / std::max(1.0, 1.0 / prod)});
    return rows;
}

}  // namespace haarprod
