#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "haarprod/haar_sampler.hpp"

namespace haarprod {

/// Radii above 1 by at most this much are roundoff and are clipped to 1.
inline constexpr double kRadiusClipSlack = 1e-8;

/// Pooled eigenvalues of independent draws of A_1 ... A_k.
struct EigenSample {
    std::vector<Complex> eigenvalues;
    std::vector<double> radii;   ///< |lambda|, clipped to 1 within kRadiusClipSlack
    std::vector<double> angles;  ///< arg(lambda) in [0, 2 pi); 0 for lambda == 0
    std::vector<int> trial;      ///< trial index of each eigenvalue
    std::size_t zero_count = 0;  ///< eigenvalues exactly at the origin (angle undefined)

    std::uint64_t master_seed = 0;
    AspectConfig config{1, {1, 1}};
    int trials = 0;

    /// Normalized trace moments (1/n_1) Tr((BB^*)^p), p = 1..moment_order,
    /// per trial. Empty unless requested in SampleOptions.
    std::vector<std::vector<double>> trace_moments;

    [[nodiscard]] std::size_t size() const noexcept { return eigenvalues.size(); }
};

/// All eigenvalues of a square complex matrix, with multiplicity. Uses
/// balancing, Hessenberg reduction and shifted QR (LAPACK zgeev). Throws
/// NumericalError naming `context` if the QR iteration does not converge.
std::vector<Complex> eigenvalues(const ComplexMatrix& b, const std::string& context = {});

struct SampleOptions {
    int workers = 1;       ///< threads evaluating trials; output does not depend on it
    int moment_order = 0;  ///< also record trace moments p = 1..moment_order
};

/// Spectra of `trials` independent product_chain draws. Trial t uses
/// RngStream(master_seed).substream(t); results are concatenated in trial
/// order.
EigenSample collect_sample(const AspectConfig& config, int trials, std::uint64_t master_seed,
                           const SampleOptions& options = {});

/// Appends the eigenvalues of one trial to the sample, computing radii and
/// angles. Throws NumericalError if a radius exceeds 1 + kRadiusClipSlack.
void append_eigenvalues(EigenSample& sample, int trial, const std::vector<Complex>& values);

}  // namespace haarprod
