#include "bocr/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "bocr/error.hpp"

namespace bocr {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows * cols) {
        throw InvalidInput("matrix value count " + std::to_string(values_.size()) +
                           " does not match " + std::to_string(rows) + "x" +
                           std::to_string(cols));
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Vector affine(const Matrix &w, std::span<const double> x, std::span<const double> b) {
    if (w.cols() != x.size() || w.rows() != b.size()) {
        throw InvalidInput("affine: W is " + std::to_string(w.rows()) + "x" +
                           std::to_string(w.cols()) + ", x has " + std::to_string(x.size()) +
                           ", b has " + std::to_string(b.size()));
    }
    Vector out(w.rows(), 0.0);
    gemv_accumulate(w, x, out);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
    return out;
}

void gemv_accumulate(const Matrix &w, std::span<const double> x, std::span<double> out) {
    const std::size_t n = w.cols();
    for (std::size_t i = 0; i < w.rows(); ++i) {
        const double *r = w.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += r[j] * x[j];
        out[i] += acc;
    }
}

void gemv_transposed_accumulate(const Matrix &w, std::span<const double> y, std::span<double> out) {
    // Column blocks stay in registers while the rows stream past; every
    // output still sums its terms in row order. Zero coefficients add
    // nothing and are skipped.
    constexpr std::size_t kBlock = 16;
    const std::size_t rows = w.rows(), cols = w.cols();
    std::size_t c0 = 0;
    for (; c0 + kBlock <= cols; c0 += kBlock) {
        double acc[kBlock];
        for (std::size_t u = 0; u < kBlock; ++u) acc[u] = out[c0 + u];
        for (std::size_t i = 0; i < rows; ++i) {
            const double yi = y[i];
            if (yi == 0.0) continue;
            const double *r = w.row(i) + c0;
            for (std::size_t u = 0; u < kBlock; ++u) acc[u] += yi * r[u];
        }
        for (std::size_t u = 0; u < kBlock; ++u) out[c0 + u] = acc[u];
    }
    if (c0 == cols) return;
    for (std::size_t i = 0; i < rows; ++i) {
        const double yi = y[i];
        if (yi == 0.0) continue;
        const double *r = w.row(i);
        for (std::size_t j = c0; j < cols; ++j) out[j] += r[j] * yi;
    }
}

void outer_accumulate(Matrix &w, std::span<const double> y, std::span<const double> x) {
    const std::size_t n = w.cols();
    for (std::size_t i = 0; i < w.rows(); ++i) {
        const double yi = y[i];
        if (yi == 0.0) continue;
        double *r = w.row(i);
        for (std::size_t j = 0; j < n; ++j) r[j] += yi * x[j];
    }
}

double sigmoid(double v) {
    // Split by sign so exp never overflows.
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
}

Vector activate(Activation kind, std::span<const double> x) {
    Vector out(x.size());
    if (kind == Activation::sigmoid) {
        std::transform(x.begin(), x.end(), out.begin(), [](double v) { return sigmoid(v); });
    } else {
        std::transform(x.begin(), x.end(), out.begin(), [](double v) { return std::tanh(v); });
    }
    return out;
}

Vector softmax(std::span<const double> logits) {
    Vector out(logits.size());
    if (logits.empty()) return out;
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - m);
        sum += out[i];
    }
    for (double &v : out) v /= sum;
    return out;
}

Vector log_softmax(std::span<const double> logits) {
    Vector out(logits.size());
    if (logits.empty()) return out;
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - m);
    const double lse = m + std::log(sum);
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
    return out;
}

double log_add(double a, double b) {
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    if (a == neg_inf) return b;
    if (b == neg_inf) return a;
    if (a < b) std::swap(a, b);
    return a + std::log1p(std::exp(b - a));
}

std::uint64_t splitmix64(std::uint64_t &state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) {
    std::uint64_t st = seed;
    for (auto &s : s_) s = splitmix64(st);
}

std::uint64_t Rng::next() {
    auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw InvalidInput("Rng::below: empty range");
    // Rejection sampling removes modulo bias.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v;
    do {
        v = next();
    } while (v >= limit);
    return v % n;
}

double Rng::normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::size_t> permutation(std::size_t n, Rng &rng) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = rng.below(i);
        std::swap(p[i - 1], p[j]);
    }
    return p;
}

double xavier_bound(std::size_t fan_in, std::size_t fan_out) {
    if (fan_in == 0 || fan_out == 0) throw InvalidInput("xavier: fan_in and fan_out must be >= 1");
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

void xavier_fill(std::span<double> out, std::size_t fan_in, std::size_t fan_out, Rng &rng) {
    const double bound = xavier_bound(fan_in, fan_out);
    for (double &v : out) v = rng.uniform(-bound, bound);
}

Matrix xavier_init(std::size_t fan_in, std::size_t fan_out, std::uint64_t seed) {
    Matrix m(fan_out, fan_in);
    Rng rng(seed);
    xavier_fill(m.values(), fan_in, fan_out, rng);
    return m;
}

} // namespace bocr
