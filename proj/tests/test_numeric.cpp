#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "bocr/error.hpp"
#include "bocr/numeric.hpp"
#include "support/oracles.hpp"

using namespace bocr;

TEST(Affine, IdentityPassesInputThrough) {
    const Vector y = affine(Matrix::identity(2), Vector{3, 4}, Vector{0, 0});
    EXPECT_EQ(y, (Vector{3, 4}));
}

TEST(Affine, ZeroWeightsGiveBias) {
    const Vector y = affine(Matrix(3, 2), Vector{5, -7}, Vector{1, 2, 3});
    EXPECT_EQ(y, (Vector{1, 2, 3}));
}

TEST(Affine, HandComputed) {
    const Matrix w(2, 2, {1, 2, 3, 4});
    EXPECT_EQ(affine(w, Vector{1, 1}, Vector{0.5, -0.5}), (Vector{3.5, 6.5}));
}

TEST(Affine, RejectsShapeMismatch) {
    EXPECT_THROW(affine(Matrix(2, 3), Vector{1, 2}, Vector{0, 0}), InvalidInput);
    EXPECT_THROW(affine(Matrix(2, 2), Vector{1, 2}, Vector{0}), InvalidInput);
}

TEST(Affine, LinearInInput) {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        Matrix w(4, 3);
        for (double &v : w.values()) v = rng.uniform(-2, 2);
        const Vector zero(4, 0.0);
        const Vector x1 = bocr::testing::random_vector(3, rng), x2 = bocr::testing::random_vector(3, rng);
        const double a = rng.uniform(-3, 3), b = rng.uniform(-3, 3);
        Vector mix(3);
        for (int k = 0; k < 3; ++k) mix[k] = a * x1[k] + b * x2[k];
        const Vector lhs = affine(w, mix, zero);
        const Vector y1 = affine(w, x1, zero), y2 = affine(w, x2, zero);
        for (int r = 0; r < 4; ++r) EXPECT_NEAR(lhs[r], a * y1[r] + b * y2[r], 1e-12);
    }
}

TEST(Gemv, TransposedAndOuterMatchLoops) {
    const Matrix w(2, 3, {1, 2, 3, 4, 5, 6});
    Vector out(3, 1.0);
    gemv_transposed_accumulate(w, Vector{1, -1}, out);
    EXPECT_EQ(out, (Vector{-2, -2, -2}));

    Matrix acc(2, 3);
    outer_accumulate(acc, Vector{2, 3}, Vector{1, 0, -1});
    EXPECT_EQ(acc, Matrix(2, 3, {2, 0, -2, 3, 0, -3}));
}

TEST(Activation, SigmoidOfZeroIsHalf) { EXPECT_EQ(sigmoid(0.0), 0.5); }

TEST(Activation, SigmoidOfLn3) { EXPECT_NEAR(sigmoid(std::log(3.0)), 0.75, 1e-15); }

TEST(Activation, TanhOfZero) { EXPECT_EQ(activate(Activation::tanh, Vector{0.0})[0], 0.0); }

TEST(Activation, SaturatesWithoutNaN) {
    for (double v : {-1e308, -800.0, 800.0, 1e308}) {
        const double s = sigmoid(v);
        EXPECT_TRUE(std::isfinite(s));
        EXPECT_GE(s, 0.0);
        EXPECT_LE(s, 1.0);
    }
}

TEST(Activation, SigmoidSymmetryAndRange) {
    Rng rng(17);
    for (int k = 0; k < 1000; ++k) {
        const double v = rng.uniform(-40, 40);
        EXPECT_NEAR(sigmoid(v) + sigmoid(-v), 1.0, 1e-15);
        EXPECT_NEAR(sigmoid(v), 1.0 / (1.0 + std::exp(-v)), 1e-15);
        const double t = activate(Activation::tanh, Vector{v})[0];
        EXPECT_GE(t, -1.0);
        EXPECT_LE(t, 1.0);
    }
}

TEST(Softmax, OfLogsIsNormalisedRatio) {
    const Vector p = softmax(Vector{std::log(1.0), std::log(2.0), std::log(3.0)});
    EXPECT_NEAR(p[0], 1.0 / 6, 1e-15);
    EXPECT_NEAR(p[1], 2.0 / 6, 1e-15);
    EXPECT_NEAR(p[2], 3.0 / 6, 1e-15);
}

TEST(Softmax, UniformForEqualLogits) {
    for (double v : softmax(Vector(5, 123.0))) EXPECT_NEAR(v, 0.2, 1e-15);
}

TEST(Softmax, HugeLogitsStayFinite) {
    const Vector p = softmax(Vector{1000.0, 1000.0});
    EXPECT_EQ(p[0], 0.5);
    EXPECT_EQ(p[1], 0.5);
}

TEST(Softmax, ShiftInvariantAndSumsToOne) {
    Rng rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        const Vector z = bocr::testing::random_vector(6, rng, -30, 30);
        const double shift = rng.uniform(-500, 500);
        Vector zs = z;
        for (double &v : zs) v += shift;
        const Vector p = softmax(z), q = softmax(zs);
        EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
        for (std::size_t k = 0; k < p.size(); ++k) EXPECT_NEAR(p[k], q[k], 1e-12);
        const Vector lp = log_softmax(z);
        for (std::size_t k = 0; k < p.size(); ++k) EXPECT_NEAR(std::exp(lp[k]), p[k], 1e-12);
    }
}

TEST(LogAdd, HandlesInfinity) {
    const double ninf = -std::numeric_limits<double>::infinity();
    EXPECT_EQ(log_add(ninf, ninf), ninf);
    EXPECT_EQ(log_add(ninf, 2.0), 2.0);
    EXPECT_NEAR(log_add(std::log(2.0), std::log(3.0)), std::log(5.0), 1e-15);
}

TEST(Xavier, BoundFormula) {
    EXPECT_NEAR(xavier_bound(48, 128), std::sqrt(6.0 / 176.0), 1e-15);
    EXPECT_NEAR(xavier_bound(128, 166), std::sqrt(6.0 / 294.0), 1e-15);
    EXPECT_NEAR(xavier_bound(128, 166), 0.1429, 1e-4);
}

TEST(Xavier, ShapeAndBounds) {
    const Matrix w = xavier_init(48, 128, 9);
    EXPECT_EQ(w.rows(), 128u);
    EXPECT_EQ(w.cols(), 48u);
    const double bound = std::sqrt(6.0 / 176.0);
    for (double v : w.values()) {
        EXPECT_GE(v, -bound);
        EXPECT_LE(v, bound);
    }
}

TEST(Xavier, MillionDrawsStayInBound) {
    Rng rng(31);
    std::vector<double> draws(1'000'000);
    xavier_fill(draws, 128, 166, rng);
    const double bound = std::sqrt(6.0 / 294.0);
    double lo = 0, hi = 0, sum = 0;
    for (double v : draws) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
    }
    EXPECT_GE(lo, -bound);
    EXPECT_LE(hi, bound);
    // The extremes of a million uniform draws sit close to the bound.
    EXPECT_GT(hi, 0.999 * bound);
    EXPECT_LT(lo, -0.999 * bound);
    EXPECT_NEAR(sum / draws.size(), 0.0, 1e-3);
}

TEST(Xavier, DeterministicPerSeed) {
    EXPECT_EQ(xavier_init(10, 7, 42), xavier_init(10, 7, 42));
    EXPECT_NE(xavier_init(10, 7, 42), xavier_init(10, 7, 43));
}

TEST(Xavier, ZeroFanRejected) {
    EXPECT_THROW(xavier_init(0, 4, 1), InvalidInput);
    EXPECT_THROW(xavier_init(4, 0, 1), InvalidInput);
}

TEST(Rng, ReproducibleStream) {
    Rng a(99), b(99);
    for (int k = 0; k < 100; ++k) EXPECT_EQ(a.next(), b.next());
}

TEST(Rng, SplitmixReferenceValue) {
    // First output of splitmix64 seeded with 0.
    std::uint64_t state = 0;
    EXPECT_EQ(splitmix64(state), 0xE220A8397B1DCDAFull);
}

TEST(Rng, UniformRangeAndBelow) {
    Rng rng(3);
    std::vector<int> hist(7, 0);
    for (int k = 0; k < 70000; ++k) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        const auto b = rng.below(7);
        ASSERT_LT(b, 7u);
        ++hist[b];
    }
    for (int c : hist) EXPECT_NEAR(c, 10000, 500);
    EXPECT_THROW(rng.below(0), InvalidInput);
}

TEST(Rng, NormalMoments) {
    Rng rng(8);
    double s = 0, s2 = 0;
    const int n = 200000;
    for (int k = 0; k < n; ++k) {
        const double v = rng.normal();
        s += v;
        s2 += v * v;
    }
    EXPECT_NEAR(s / n, 0.0, 0.01);
    EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Rng, PermutationIsBijective) {
    Rng rng(12);
    for (std::size_t n : {0u, 1u, 2u, 17u, 500u}) {
        const auto p = permutation(n, rng);
        EXPECT_EQ(p.size(), n);
        EXPECT_EQ(std::set<std::size_t>(p.begin(), p.end()).size(), n);
        for (auto v : p) EXPECT_LT(v, n);
    }
}
