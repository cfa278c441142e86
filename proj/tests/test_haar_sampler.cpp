#include <doctest.h>

#include <cmath>
#include <numbers>

#include "haarprod/errors.hpp"
#include "haarprod/haar_sampler.hpp"
#include "haarprod/spectra.hpp"
#include "haarprod/stats.hpp"

using namespace haarprod;

TEST_CASE("AspectConfig validates the block dimensions") {
    const AspectConfig c(8, {4, 6, 4});
    CHECK(c.k() == 2);
    CHECK(c.product_size() == 4);
    CHECK(c.alphas() == std::vector<double>{2.0, 8.0 / 6.0});
    CHECK(c.has_analytic_law());

    CHECK_FALSE(AspectConfig(4, {4, 4}).has_analytic_law());
    CHECK_THROWS_AS(AspectConfig(8, {4}), std::invalid_argument);
    CHECK_THROWS_AS(AspectConfig(8, {6, 4, 6}), std::invalid_argument);  // n_1 not the minimum
    CHECK_THROWS_AS(AspectConfig(8, {4, 4, 6}), std::invalid_argument);  // n_{k+1} != n_1
    CHECK_THROWS_AS(AspectConfig(8, {4, 9, 4}), std::invalid_argument);  // exceeds n
    CHECK_THROWS_AS(AspectConfig(0, {1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(AspectConfig::equal(8, 4, 0), std::invalid_argument);
}

TEST_CASE("sample_ginibre: shape and moments") {
    RngStream s(1);
    const auto one = sample_ginibre(1, 1, s);
    CHECK(one.rows() == 1);
    CHECK(one.cols() == 1);
    CHECK(std::isfinite(std::abs(one(0, 0))));

    constexpr int draws = 100000;
    const auto g = sample_ginibre(draws, 1, s);
    const Complex mean = g.mean();
    const double bound = 4.0 / std::sqrt(static_cast<double>(draws));
    CHECK(std::abs(mean.real()) <= bound);
    CHECK(std::abs(mean.imag()) <= bound);
    CHECK(std::abs(g.squaredNorm() / draws - 1.0) <= 0.02);

    CHECK_THROWS_AS(sample_ginibre(0, 3, s), DimensionError);
}

TEST_CASE("haar_unitary: small cases") {
    RngStream s(2);
    const auto u1 = haar_unitary(1, s);
    CHECK(std::abs(std::abs(u1(0, 0)) - 1.0) <= 1e-12);

    const auto u8 = haar_unitary(8, s);
    const ComplexMatrix gram = u8.adjoint() * u8;
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
            CHECK(std::abs(gram(i, j) - (i == j ? 1.0 : 0.0)) <= 1e-12);
        }
    }
}

TEST_CASE("haar_unitary: unitarity across sizes and seeds") {
    for (int n : {1, 2, 3, 5, 8, 17, 64, 128, 256}) {
        for (std::uint64_t seed : {3ULL, 99ULL}) {
            RngStream s(seed * 1000 + static_cast<std::uint64_t>(n));
            const auto u = haar_unitary(n, s);
            CHECK(unitarity_defect(u) <= 1e-12 * n);
        }
    }
}

TEST_CASE("haar_unitary: first-column statistics") {
    // E|U_11|^2 = 1/n; E U_11 = 0; E|Tr U|^2 = 1. The last two fail without
    // the phase correction of the QR factor.
    constexpr int n = 4;
    constexpr int draws = 10000;
    RngStream s(4);
    double sq = 0.0;
    Complex mean = 0.0;
    double trace_sq = 0.0;
    for (int t = 0; t < draws; ++t) {
        const auto u = haar_unitary(n, s);
        sq += std::norm(u(0, 0));
        mean += u(0, 0);
        trace_sq += std::norm(u.trace());
    }
    CHECK(std::abs(sq / draws - 0.25) <= 0.02);
    CHECK(std::abs(mean.real() / draws) <= 0.015);
    CHECK(std::abs(mean.imag() / draws) <= 0.015);
    CHECK(std::abs(trace_sq / draws - 1.0) <= 0.06);
}

TEST_CASE("haar_unitary: left invariance of the trace distribution") {
    constexpr int n = 4;
    constexpr int draws = 10000;
    RngStream fixed(12345);
    const ComplexMatrix v = haar_unitary(n, fixed);

    RngStream a(5);
    RngStream b(6);
    std::vector<double> plain_re, plain_im, rotated_re, rotated_im;
    for (int t = 0; t < draws; ++t) {
        const Complex tu = haar_unitary(n, a).trace();
        const Complex tvu = (v * haar_unitary(n, b)).trace();
        plain_re.push_back(tu.real());
        plain_im.push_back(tu.imag());
        rotated_re.push_back(tvu.real());
        rotated_im.push_back(tvu.imag());
    }
    CHECK(ks_two_sample(plain_re, rotated_re).p_value > 0.001);
    CHECK(ks_two_sample(plain_im, rotated_im).p_value > 0.001);
}

TEST_CASE("haar_isometry matches the leading columns of haar_unitary") {
    RngStream a(7);
    RngStream b(7);
    const auto full = haar_unitary(10, a);
    const auto thin = haar_isometry(10, 4, b);
    CHECK((full.leftCols(4) - thin).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(unitarity_defect(thin) <= 1e-12 * 10);
    RngStream c(8);
    CHECK_THROWS_AS(haar_isometry(4, 5, c), DimensionError);
}

TEST_CASE("truncate_block") {
    RngStream s(9);
    const auto u = haar_unitary(6, s);
    CHECK(truncate_block(u, 6, 6) == u);
    const auto corner = truncate_block(u, 1, 1);
    CHECK(corner.size() == 1);
    CHECK(corner(0, 0) == u(0, 0));
    const auto block = truncate_block(u, 3, 2);
    CHECK(block.rows() == 3);
    CHECK(block.cols() == 2);
    CHECK(operator_norm(block) <= 1.0 + 1e-12);
    CHECK_THROWS_AS(truncate_block(u, 7, 2), DimensionError);
    CHECK_THROWS_AS(truncate_block(u, 2, 7), DimensionError);
}

TEST_CASE("product_chain: shapes and contraction") {
    const RngStream s(10);
    SUBCASE("k = 1 without truncation is unitary") {
        const auto b = product_chain(AspectConfig(6, {6, 6}), s);
        CHECK(unitarity_defect(b) <= 1e-12 * 6);
        for (const Complex& z : eigenvalues(b)) CHECK(std::abs(std::abs(z) - 1.0) <= 1e-10);
    }
    SUBCASE("k = 2 square blocks") {
        const auto b = product_chain(AspectConfig(8, {4, 4, 4}), s);
        CHECK(b.rows() == 4);
        CHECK(b.cols() == 4);
        CHECK(operator_norm(b) <= 1.0 + 1e-10);
    }
    SUBCASE("rectangular inner block") {
        const auto b = product_chain(AspectConfig(8, {4, 6, 4}), s);
        CHECK(b.rows() == 4);
        CHECK(b.cols() == 4);
    }
}

TEST_CASE("product_chain: contraction over random configurations") {
    std::mt19937_64 gen(11);
    for (int rep = 0; rep < 40; ++rep) {
        const int n = std::uniform_int_distribution<int>(2, 40)(gen);
        const int k = std::uniform_int_distribution<int>(1, 4)(gen);
        const int m = std::uniform_int_distribution<int>(1, n)(gen);
        std::vector<int> dims(static_cast<std::size_t>(k) + 1, m);
        for (int i = 1; i < k; ++i) dims[static_cast<std::size_t>(i)] = std::uniform_int_distribution<int>(m, n)(gen);
        const auto b = product_chain(AspectConfig(n, dims), RngStream(gen()));
        CHECK(operator_norm(b) <= 1.0 + 1e-10);
    }
}

TEST_CASE("product_chain: determinism") {
    const AspectConfig c(30, {10, 20, 15, 10});
    const auto x = product_chain(c, RngStream(77));
    const auto y = product_chain(c, RngStream(77));
    const auto z = product_chain(c, RngStream(78));
    CHECK(x == y);
    CHECK_FALSE(x == z);
}

TEST_CASE("trace_moment") {
    const ComplexMatrix id = ComplexMatrix::Identity(5, 5);
    for (int p = 0; p <= 4; ++p) CHECK(trace_moment(id, p) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(trace_moment(ComplexMatrix::Zero(3, 3), 1) == 0.0);
    CHECK(trace_moment(ComplexMatrix::Zero(3, 3), 0) == 1.0);
    CHECK_THROWS_AS(trace_moment(ComplexMatrix::Zero(3, 2), 1), DimensionError);

    // Against an explicit matrix power.
    RngStream s(12);
    const ComplexMatrix b = 0.3 * sample_ginibre(7, 7, s);
    const ComplexMatrix h = b * b.adjoint();
    ComplexMatrix power = ComplexMatrix::Identity(7, 7);
    for (int p = 1; p <= 5; ++p) {
        power = power * h;
        const double direct = power.trace().real() / 7.0;
        CHECK(trace_moment(b, p) == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("trace_moment: mean over trials approaches 1 / prod alpha") {
    const AspectConfig c = AspectConfig::equal(400, 200, 2);
    double sum = 0.0;
    constexpr int trials = 50;
    for (int t = 0; t < trials; ++t) sum += trace_moment(product_chain(c, RngStream(500).substream(t)), 1);
    CHECK(std::abs(sum / trials - 0.25) <= 0.01);
}
