#pragma once

#include <span>
#include <string>
#include <vector>

namespace haarprod {

inline constexpr int kDefaultSeriesOrder = 16;

/// Real power series c_0 + c_1 z + ... + c_N z^N, known modulo z^{N+1}.
/// N is the order. Arithmetic truncates to the smaller operand order.
class PowerSeries {
public:
    PowerSeries() : coeffs_(1, 0.0) {}
    explicit PowerSeries(std::vector<double> coeffs);

    static PowerSeries zero(int order);
    static PowerSeries constant(double c, int order);
    /// The series z.
    static PowerSeries identity(int order);
    /// c_0 + c_1 z, padded with zeros to the given order.
    static PowerSeries linear(double c0, double c1, int order);

    [[nodiscard]] int order() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
    [[nodiscard]] double operator[](int j) const { return coeffs_.at(static_cast<std::size_t>(j)); }
    [[nodiscard]] const std::vector<double>& coeffs() const noexcept { return coeffs_; }
    /// Index of the first nonzero coefficient, or order() + 1 if all vanish.
    [[nodiscard]] int valuation() const noexcept;

    [[nodiscard]] PowerSeries truncated(int order) const;
    [[nodiscard]] PowerSeries derivative() const;
    /// f(c z).
    [[nodiscard]] PowerSeries scaled_argument(double c) const;
    /// Horner evaluation of the retained polynomial.
    [[nodiscard]] double evaluate(double z) const;

    friend PowerSeries operator+(const PowerSeries& a, const PowerSeries& b);
    friend PowerSeries operator-(const PowerSeries& a, const PowerSeries& b);
    friend PowerSeries operator*(double s, const PowerSeries& a);

private:
    std::vector<double> coeffs_;
};

PowerSeries series_mul(const PowerSeries& a, const PowerSeries& b);

/// a / b. Common leading powers of z are cancelled first, which costs that
/// many orders of precision; throws std::domain_error if b vanishes or has a
/// higher valuation than a.
PowerSeries series_div(const PowerSeries& a, const PowerSeries& b);

/// a(b(z)). Requires b_0 = 0.
PowerSeries series_compose(const PowerSeries& a, const PowerSeries& b);

/// Moment-type series sum_{j=1}^N c_j z^j (zero constant term), such as
/// M_a(z) = sum phi(a^j) z^j.
class TruncatedSeries {
public:
    /// From c_1..c_N.
    static TruncatedSeries from_coefficients(std::span<const double> c);
    /// Throws std::invalid_argument unless s[0] == 0.
    explicit TruncatedSeries(PowerSeries s);

    [[nodiscard]] int order() const noexcept { return series_.order(); }
    /// c_j for 1 <= j <= order().
    [[nodiscard]] double coeff(int j) const { return series_[j]; }
    [[nodiscard]] std::vector<double> coefficients() const;
    [[nodiscard]] const PowerSeries& series() const noexcept { return series_; }

private:
    PowerSeries series_;
};

/// S-transform series s_0 + s_1 z + ... + s_{N-1} z^{N-1}; order() is N, the
/// number of coefficients, matching the order of the moment series it
/// came from.
class STransformSeries {
public:
    explicit STransformSeries(PowerSeries s);

    [[nodiscard]] int order() const noexcept { return series_.order() + 1; }
    [[nodiscard]] double coeff(int j) const { return series_[j]; }
    [[nodiscard]] const PowerSeries& series() const noexcept { return series_; }

private:
    PowerSeries series_;
};

/// Compositional inverse g with f(g(z)) = z. Newton iteration
/// g <- g - (f o g - z) / (f' o g), doubling the number of correct terms per
/// step. Throws std::domain_error if c_1 == 0.
TruncatedSeries comp_inverse(const TruncatedSeries& f);

/// M(z) = sum_j moments[j-1] z^j.
TruncatedSeries m_from_moments(std::span<const double> moments);

/// S(z) = (1 + z) / z * M^{-1}(z). Throws std::domain_error if the first
/// moment is zero.
STransformSeries s_transform_of(const TruncatedSeries& m);

/// Inverse of s_transform_of: M^{-1}(z) = z / (1 + z) * S(z), then invert.
/// Returns the first order() moments.
std::vector<double> moments_from_s(const STransformSeries& s);

/// Moment series of a projection of trace 1/alpha: every moment is 1/alpha.
TruncatedSeries projection_moment_series(double alpha, int order = kDefaultSeriesOrder);

/// S_{b_1} S_{b_2} ... S_{b_k} S_{b_1}, each factor computed from the
/// projection moment series by s_transform_of. This is the S-transform of
/// the compressed product in the ambient n x n algebra.
STransformSeries product_s_check(std::span<const double> alphas, int order = kDefaultSeriesOrder);

/// Rescales product_s_check to the n_1 x n_1 algebra:
/// S(z) = (1 + z) / (alpha_1 + z) * S~(z / alpha_1).
/// Requires alphas[0] = max alpha_i > 1.
STransformSeries scaled_s_check(std::span<const double> alphas, int order = kDefaultSeriesOrder);

/// The scaling step in moment space: moments of the ambient product recovered
/// from S~ and multiplied by alpha_1, which should equal the moments of aa*.
/// Stays in moment space because moments -> S amplifies the rounding of small
/// moments by several orders of magnitude at high order.
std::vector<double> scaled_moments_check(std::span<const double> alphas, int order = kDefaultSeriesOrder);

/// Taylor series of prod_i alpha_i (alpha_1 + z) / (alpha_1 + alpha_i z),
/// alphas[0] taken as alpha_1.
STransformSeries closed_form_s(std::span<const double> alphas, int order = kDefaultSeriesOrder);

/// Taylor series of alpha (1 + z) / (1 + alpha z).
STransformSeries projection_s_closed_form(double alpha, int order = kDefaultSeriesOrder);

/// max over j <= through of |a_j - b_j| / max(1, |b_j|).
double coefficient_residual(const PowerSeries& a, const PowerSeries& b, int through);

struct SeriesCheckRow {
    std::string check;  ///< which identity
    int index = 0;      ///< factor index for per-block checks, else 0
    double residual = 0.0;
};

/// Residuals of every formal identity in the S-transform pipeline against
/// closed forms, through z^through:
///   projection_m, projection_m_inverse, projection_s  (per block)
///   product        S~ against the product of closed-form block S-transforms
///   scaled         scaled_s_check against closed_form_s
///   scaled_moments scaled_moments_check against moments_from_s(closed_form_s)
///   mean           first moment of closed_form_s against 1 / prod alpha_i
std::vector<SeriesCheckRow> series_check_report(std::span<const double> alphas, int order = kDefaultSeriesOrder,
                                                int through = 12);

}  // namespace haarprod
