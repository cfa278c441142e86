#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "haarprod/rng.hpp"

namespace haarprod {

using Complex = std::complex<double>;

/// Dense complex matrix, column-major.
using ComplexMatrix = Eigen::MatrixXcd;

/// Ambient dimension n and block dimensions n_1..n_{k+1} for the product
/// A_1 A_2 ... A_k, where A_i is the upper-left n_i x n_{i+1} block of the
/// i-th Haar unitary. Aspect ratios are alpha_i = n / n_i.
///
/// Requires k >= 1, 1 <= n_i <= n and n_1 = n_{k+1} = min(n_1..n_{k+1}), which
/// makes alpha_1 the largest ratio.
class AspectConfig {
public:
    AspectConfig(int n, std::vector<int> dims);

    /// n_1 = ... = n_{k+1} = m, so every alpha_i = n / m.
    static AspectConfig equal(int n, int m, int k);

    [[nodiscard]] int n() const noexcept { return n_; }
    [[nodiscard]] int k() const noexcept { return static_cast<int>(dims_.size()) - 1; }
    [[nodiscard]] const std::vector<int>& dims() const noexcept { return dims_; }
    [[nodiscard]] const std::vector<double>& alphas() const noexcept { return alphas_; }
    /// Size of the (square) product matrix, n_1.
    [[nodiscard]] int product_size() const noexcept { return dims_.front(); }
    /// True when every alpha_i > 1, i.e. the limit law is non-degenerate.
    [[nodiscard]] bool has_analytic_law() const noexcept;

    friend bool operator==(const AspectConfig&, const AspectConfig&) = default;

private:
    int n_;
    std::vector<int> dims_;
    std::vector<double> alphas_;
};

/// i.i.d. standard complex normal entries: real and imaginary parts are
/// independent N(0, 1/2), so E|g|^2 = 1. Filled column by column, so the
/// first q columns of a rows x cols draw equal a rows x q draw from the same
/// stream.
ComplexMatrix sample_ginibre(int rows, int cols, RngStream& stream);

/// Haar-distributed n x n unitary: Ginibre draw, Householder QR, then the
/// columns of Q are rotated by the phases of diag(R) so that R has a positive
/// diagonal. Resamples when the draw is numerically rank deficient and throws
/// NumericalError after three failed attempts.
ComplexMatrix haar_unitary(int n, RngStream& stream);

/// The first `cols` columns of a Haar unitary of size n (a Haar-distributed
/// isometry). Same construction as haar_unitary on an n x cols Ginibre draw;
/// haar_unitary(n, s) restricted to its first `cols` columns matches this for
/// the same stream up to roundoff.
ComplexMatrix haar_isometry(int n, int cols, RngStream& stream);

/// Upper-left p x q block. Throws DimensionError if it does not fit.
ComplexMatrix truncate_block(const ComplexMatrix& u, int p, int q);

/// Draws the k independent truncations and returns A_1 A_2 ... A_k (n_1 x n_1).
/// Matrix i uses stream.substream(i).
ComplexMatrix product_chain(const AspectConfig& config, const RngStream& stream);

/// (1/n) Tr((B B^*)^p) for square B. p = 0 gives 1.
double trace_moment(const ComplexMatrix& b, int p);

/// Singular values in descending order.
std::vector<double> singular_values(const ComplexMatrix& b);

/// Largest singular value.
double operator_norm(const ComplexMatrix& b);

/// max_ij |(U U^*)_ij - delta_ij|
double unitarity_defect(const ComplexMatrix& u);

}  // namespace haarprod
