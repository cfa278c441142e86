#include "haarprod/spectra.hpp"

#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

#include "haarprod/errors.hpp"
#include "lapack.hpp"

namespace haarprod {

std::vector<Complex> eigenvalues(const ComplexMatrix& b, const std::string& context) {
    if (b.rows() != b.cols()) throw DimensionError("eigenvalues: matrix must be square");
    if (!b.allFinite()) throw std::invalid_argument("eigenvalues: non-finite entry " + context);
    const lapack_int n = static_cast<lapack_int>(b.rows());
    ComplexMatrix work = b;
    std::vector<Complex> w(static_cast<std::size_t>(n));
    const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, work.data(), n, w.data(), nullptr, 1,
                                          nullptr, 1);
    if (info > 0) {
        throw NumericalError("eigenvalues: QR iteration failed to converge (" + std::to_string(info) +
                             " eigenvalues unresolved)" + (context.empty() ? "" : " for " + context));
    }
    if (info < 0) throw NumericalError("eigenvalues: zgeev argument error " + std::to_string(info));
    return w;
}

void append_eigenvalues(EigenSample& sample, int trial, const std::vector<Complex>& values) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (const Complex& z : values) {
        double r = std::abs(z);
        if (r > 1.0) {
            if (r > 1.0 + kRadiusClipSlack) {
                throw NumericalError("spectra: eigenvalue radius " + std::to_string(r) +
                                     " exceeds 1 in trial " + std::to_string(trial) +
                                     " (seed " + std::to_string(sample.master_seed) + ")");
            }
            r = 1.0;
        }
        double theta = 0.0;
        if (z == Complex(0.0, 0.0)) {
            ++sample.zero_count;
        } else {
            theta = std::atan2(z.imag(), z.real());
            if (theta < 0.0) theta += two_pi;
            if (theta >= two_pi) theta = 0.0;
        }
        sample.eigenvalues.push_back(z);
        sample.radii.push_back(r);
        sample.angles.push_back(theta);
        sample.trial.push_back(trial);
    }
}

namespace {

struct TrialResult {
    std::vector<Complex> values;
    std::vector<double> moments;
};

TrialResult run_trial(const AspectConfig& config, std::uint64_t master_seed, int trial, int moment_order) {
    const std::string where = "trial " + std::to_string(trial) + " (seed " + std::to_string(master_seed) + ")";
    const RngStream stream = RngStream(master_seed).substream(static_cast<std::uint64_t>(trial));
    ComplexMatrix b;
    try {
        b = product_chain(config, stream);
    } catch (const NumericalError& e) {
        throw NumericalError(std::string(e.what()) + " in " + where);
    }
    TrialResult out;
    out.values = eigenvalues(b, where);
    for (int p = 1; p <= moment_order; ++p) out.moments.push_back(trace_moment(b, p));
    return out;
}

}  // namespace

EigenSample collect_sample(const AspectConfig& config, int trials, std::uint64_t master_seed,
                           const SampleOptions& options) {
    if (trials < 1) throw std::invalid_argument("collect_sample: trials must be >= 1");
    std::vector<TrialResult> results(static_cast<std::size_t>(trials));

    const int workers = std::max(1, std::min(options.workers, trials));
    if (workers == 1) {
        for (int t = 0; t < trials; ++t) {
            results[static_cast<std::size_t>(t)] = run_trial(config, master_seed, t, options.moment_order);
        }
    } else {
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (int t = w; t < trials; t += workers) {
                        results[static_cast<std::size_t>(t)] =
                            run_trial(config, master_seed, t, options.moment_order);
                    }
                } catch (...) {
                    errors[static_cast<std::size_t>(w)] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    EigenSample sample;
    sample.master_seed = master_seed;
    sample.config = config;
    sample.trials = trials;
    const auto per_trial = static_cast<std::size_t>(config.product_size());
    sample.eigenvalues.reserve(per_trial * results.size());
    sample.radii.reserve(per_trial * results.size());
    sample.angles.reserve(per_trial * results.size());
    sample.trial.reserve(per_trial * results.size());
    for (int t = 0; t < trials; ++t) {
        auto& r = results[static_cast<std::size_t>(t)];
        append_eigenvalues(sample, t, r.values);
        if (options.moment_order > 0) sample.trace_moments.push_back(std::move(r.moments));
    }
    return sample;
}

}  // namespace haarprod
