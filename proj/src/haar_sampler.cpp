#include "haarprod/haar_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "haarprod/errors.hpp"
#include "lapack.hpp"

namespace haarprod {

namespace {

constexpr int kMaxHaarAttempts = 3;

// Householder QR of g in place, overwriting it with the explicit thin Q whose
// columns are rotated so that R would have a positive real diagonal.
// Returns false if R has a (numerically) zero diagonal entry.
bool phase_fixed_qr(ComplexMatrix& g) {
    const lapack_int rows = static_cast<lapack_int>(g.rows());
    const lapack_int cols = static_cast<lapack_int>(g.cols());
    std::vector<Complex> tau(static_cast<std::size_t>(cols));

    if (LAPACKE_zgeqrf(LAPACK_COL_MAJOR, rows, cols, g.data(), rows, tau.data()) != 0) {
        throw NumericalError("haar_sampler: zgeqrf failed");
    }

    std::vector<Complex> phase(static_cast<std::size_t>(cols));
    double rmax = 0.0;
    for (lapack_int j = 0; j < cols; ++j) rmax = std::max(rmax, std::abs(g(j, j)));
    const double floor = static_cast<double>(rows) * std::numeric_limits<double>::epsilon() * rmax;
    for (lapack_int j = 0; j < cols; ++j) {
        const Complex r = g(j, j);
        const double mag = std::abs(r);
        if (!(mag > floor)) return false;
        phase[static_cast<std::size_t>(j)] = r / mag;
    }

    if (LAPACKE_zungqr(LAPACK_COL_MAJOR, rows, cols, cols, g.data(), rows, tau.data()) != 0) {
        throw NumericalError("haar_sampler: zungqr failed");
    }
    for (lapack_int j = 0; j < cols; ++j) g.col(j) *= phase[static_cast<std::size_t>(j)];
    return true;
}

}  // namespace

AspectConfig::AspectConfig(int n, std::vector<int> dims) : n_(n), dims_(std::move(dims)) {
    if (n_ < 1) throw std::invalid_argument("AspectConfig: n must be >= 1");
    if (dims_.size() < 2) throw std::invalid_argument("AspectConfig: need k+1 >= 2 block dimensions");
    for (int d : dims_) {
        if (d < 1 || d > n_) {
            throw std::invalid_argument("AspectConfig: block dimension " + std::to_string(d) +
                                        " outside [1, n=" + std::to_string(n_) + "]");
        }
    }
    const int smallest = *std::min_element(dims_.begin(), dims_.end());
    if (dims_.front() != smallest || dims_.back() != smallest) {
        throw std::invalid_argument("AspectConfig: first and last block dimensions must equal the minimum");
    }
    alphas_.reserve(dims_.size() - 1);
    for (std::size_t i = 0; i + 1 < dims_.size(); ++i) {
        alphas_.push_back(static_cast<double>(n_) / static_cast<double>(dims_[i]));
    }
}

AspectConfig AspectConfig::equal(int n, int m, int k) {
    if (k < 1) throw std::invalid_argument("AspectConfig: k must be >= 1");
    return AspectConfig(n, std::vector<int>(static_cast<std::size_t>(k) + 1, m));
}

bool AspectConfig::has_analytic_law() const noexcept {
    return std::all_of(alphas_.begin(), alphas_.end(), [](double a) { return a > 1.0; });
}

ComplexMatrix sample_ginibre(int rows, int cols, RngStream& stream) {
    if (rows < 1 || cols < 1) throw DimensionError("sample_ginibre: dimensions must be positive");
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    auto& engine = stream.engine();
    ComplexMatrix g(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            const double re = normal(engine);
            const double im = normal(engine);
            g(i, j) = Complex(re, im);
        }
    }
    return g;
}

ComplexMatrix haar_isometry(int n, int cols, RngStream& stream) {
    if (n < 1 || cols < 1 || cols > n) {
        throw DimensionError("haar_isometry: need 1 <= cols <= n");
    }
    for (int attempt = 0; attempt < kMaxHaarAttempts; ++attempt) {
        ComplexMatrix g = sample_ginibre(n, cols, stream);
        if (phase_fixed_qr(g)) return g;
    }
    throw NumericalError("haar_sampler: rank-deficient Ginibre draw " + std::to_string(kMaxHaarAttempts) +
                         " times (n=" + std::to_string(n) + ", seed=" + std::to_string(stream.seed()) + ")");
}

ComplexMatrix haar_unitary(int n, RngStream& stream) { return haar_isometry(n, n, stream); }

ComplexMatrix truncate_block(const ComplexMatrix& u, int p, int q) {
    if (p < 1 || q < 1 || p > u.rows() || q > u.cols()) {
        throw DimensionError("truncate_block: " + std::to_string(p) + "x" + std::to_string(q) +
                             " block does not fit in " + std::to_string(u.rows()) + "x" +
                             std::to_string(u.cols()));
    }
    return u.topLeftCorner(p, q);
}

ComplexMatrix product_chain(const AspectConfig& config, const RngStream& stream) {
    const auto& dims = config.dims();
    ComplexMatrix product;
    for (int i = 0; i < config.k(); ++i) {
        // Only the first n_{i+1} columns of U_i enter the truncation.
        RngStream sub = stream.substream(static_cast<std::uint64_t>(i));
        const int rows = dims[static_cast<std::size_t>(i)];
        const int cols = dims[static_cast<std::size_t>(i) + 1];
        ComplexMatrix block = haar_isometry(config.n(), cols, sub).topRows(rows);
        if (i == 0) {
            product = std::move(block);
        } else {
            product = product * block;
        }
    }
    return product;
}

double trace_moment(const ComplexMatrix& b, int p) {
    if (b.rows() != b.cols()) throw DimensionError("trace_moment: matrix must be square");
    if (p < 0) throw std::invalid_argument("trace_moment: p must be >= 0");
    if (p == 0) return 1.0;
    const double n = static_cast<double>(b.rows());
    const ComplexMatrix h = b * b.adjoint();
    // Tr(H^p) = ||H^{p/2}||_F^2 for even p, Tr(P H P) with P = H^{(p-1)/2} for odd p.
    ComplexMatrix half = ComplexMatrix::Identity(b.rows(), b.cols());
    for (int i = 0; i < p / 2; ++i) half = half * h;
    if (p % 2 == 0) return half.squaredNorm() / n;
    const ComplexMatrix hp = half * h;
    return hp.cwiseProduct(half.transpose()).sum().real() / n;
}

std::vector<double> singular_values(const ComplexMatrix& b) {
    ComplexMatrix work = b;
    const lapack_int rows = static_cast<lapack_int>(b.rows());
    const lapack_int cols = static_cast<lapack_int>(b.cols());
    const auto count = static_cast<std::size_t>(std::min(rows, cols));
    std::vector<double> s(count);
    std::vector<double> superb(count > 1 ? count - 1 : 1);
    const lapack_int info = LAPACKE_zgesvd(LAPACK_COL_MAJOR, 'N', 'N', rows, cols, work.data(), rows, s.data(),
                                           nullptr, 1, nullptr, 1, superb.data());
    if (info != 0) throw NumericalError("singular_values: zgesvd did not converge");
    return s;
}

double operator_norm(const ComplexMatrix& b) {
    const auto s = singular_values(b);
    return s.empty() ? 0.0 : s.front();
}

double unitarity_defect(const ComplexMatrix& u) {
    // U U^* for square input; U^* U for a tall isometry.
    const ComplexMatrix gram = u.rows() == u.cols() ? ComplexMatrix(u * u.adjoint()) : ComplexMatrix(u.adjoint() * u);
    return (gram - ComplexMatrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

}  // namespace haarprod
