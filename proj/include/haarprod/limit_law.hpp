#pragma once

#include <string>
#include <vector>

#include "haarprod/haar_sampler.hpp"

namespace haarprod {

/// The limiting spectral distribution of A_1 ... A_k for aspect ratios
/// alpha_1..alpha_k. The law is rotationally invariant; its radial CDF is
///
///     F(t) = 1 + S^{-1}(t^{-2}),   0 < t <= 1 / sqrt(alpha_1 ... alpha_k),
///
/// where S(w) = prod_i alpha_i (alpha_1 + w) / (alpha_1 + alpha_i w) is the
/// S-transform of a a^* and alpha_1 is the largest ratio. S is strictly
/// decreasing on (-1, 0] from +inf to prod alpha_i, so the inverse is unique.
///
/// Internally everything is parametrized by x = 1 + w in (0, 1], which is
/// also the CDF value, so small CDF values keep full relative precision.
///
/// Ratios may be given in any order; they are sorted descending so that
/// alpha_1 is the maximum, and reordered() reports whether that changed the
/// input. A ratio equal to 1 is accepted but disables every analytic
/// operation (the law is then not absolutely continuous); those throw
/// std::domain_error.
class RadialLaw {
public:
    explicit RadialLaw(std::vector<double> alphas);
    explicit RadialLaw(const AspectConfig& config) : RadialLaw(config.alphas()) {}

    [[nodiscard]] int k() const noexcept { return static_cast<int>(alphas_.size()); }
    [[nodiscard]] const std::vector<double>& alphas() const noexcept { return alphas_; }
    [[nodiscard]] bool equal_alpha() const noexcept { return equal_alpha_; }
    [[nodiscard]] bool analytic() const noexcept { return analytic_; }
    [[nodiscard]] bool reordered() const noexcept { return reordered_; }
    /// Non-empty when the input ratios had to be re-sorted.
    [[nodiscard]] const std::string& warning() const noexcept { return warning_; }

    /// 1 / sqrt(prod alpha_i).
    [[nodiscard]] double support_radius() const noexcept { return support_radius_; }
    /// prod alpha_i = S(0).
    [[nodiscard]] double alpha_product() const noexcept { return alpha_product_; }

    /// S(w) for w in (-1, 0].
    [[nodiscard]] double s_eval(double w) const;
    /// dS/dw for w in (-1, 0].
    [[nodiscard]] double s_derivative(double w) const;
    /// The unique w in (-1, 0] with S(w) = s, for s >= prod alpha_i.
    /// Throws std::range_error for s below the range.
    [[nodiscard]] double s_inverse(double s) const;

    /// Radial CDF mu_k{|z| <= t}.
    [[nodiscard]] double cdf(double t) const;
    /// Radial density. Closed form for equal ratios; otherwise a central
    /// difference of cdf with step 1e-6 * support_radius (approximate).
    [[nodiscard]] double pdf(double t) const;
    /// t with cdf(t) = p. Closed form: t = S(p - 1)^{-1/2}.
    [[nodiscard]] double quantile(double p) const;

    /// G with cdf(t) = G(t^2): the CDF of the squared radius.
    [[nodiscard]] double squared_radius_cdf(double u) const;

private:
    // S and d log S / dx in terms of x = 1 + w.
    [[nodiscard]] double s_of_x(double x) const noexcept;
    [[nodiscard]] double dlog_s_of_x(double x) const noexcept;
    // x in (0, 1] with S = s, s >= alpha_product.
    [[nodiscard]] double solve_x(double s) const;
    void require_analytic(const char* op) const;

    std::vector<double> alphas_;
    bool equal_alpha_ = false;
    bool analytic_ = false;
    bool reordered_ = false;
    std::string warning_;
    double alpha_product_ = 1.0;
    double support_radius_ = 1.0;
    // Below this radius the inversion would need x < kMinCdfX; cdf returns 0.
    double zero_radius_ = 0.0;
};

/// Closed-form CDF for alpha_1 = ... = alpha_k = alpha:
/// (alpha - 1) t^{2/k} / (1 - t^{2/k}). Clamps to 0 below 0 and to 1 above
/// the support radius alpha^{-k/2}.
double cdf_equal_alpha(double alpha, int k, double t);

/// Radial density for equal ratios:
/// 2 (alpha - 1) / k * t^{2/k - 1} / (1 - t^{2/k})^2 on the open support,
/// 0 elsewhere.
double pdf_radial_equal_alpha(double alpha, int k, double t);

/// Density of mu_k in polar coordinates, w.r.t. dr dtheta:
/// (alpha - 1) / (k pi) * r^{2/k - 1} / (1 - r^{2/k})^2.
double density_polar_equal_alpha(double alpha, int k, double r);

/// Radius with R^2 = (u / (alpha - 1 + u))^k. For alpha = 1 this is 1.
double radius_from_uniform(double alpha, int k, double u);

/// i.i.d. draws R e^{i theta} from the equal-ratio law: R from
/// radius_from_uniform with u ~ U[0, 1], theta ~ U[0, 2 pi) independent.
/// alpha = 1 gives the uniform law on the unit circle.
std::vector<Complex> exact_sample(double alpha, int k, std::size_t count, RngStream& stream);

}  // namespace haarprod
