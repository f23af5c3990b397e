#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace bocr {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return values_.size(); }

    double &operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

    const double *row(std::size_t r) const { return values_.data() + r * cols_; }
    double *row(std::size_t r) { return values_.data() + r * cols_; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    bool operator==(const Matrix &) const = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

// W·x + b
Vector affine(const Matrix &w, std::span<const double> x, std::span<const double> b);

// Accumulates W·x into out (out += W·x). No allocation; used on hot paths.
void gemv_accumulate(const Matrix &w, std::span<const double> x, std::span<double> out);
// out += Wᵀ·y. Terms are summed in row order for every output.
void gemv_transposed_accumulate(const Matrix &w, std::span<const double> y, std::span<double> out);
// W += y ⊗ x
void outer_accumulate(Matrix &w, std::span<const double> y, std::span<const double> x);

enum class Activation { sigmoid, tanh };

double sigmoid(double v);
Vector activate(Activation kind, std::span<const double> x);

// Numerically stable softmax (max-subtracted).
Vector softmax(std::span<const double> logits);
// log(softmax(logits)), same stabilisation.
Vector log_softmax(std::span<const double> logits);

// log(exp(a) + exp(b)) tolerant of -inf operands.
double log_add(double a, double b);

// xoshiro256** seeded through splitmix64. The algorithm is fixed so that
// every platform draws the same stream for the same seed.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next();
    // Uniform on [0, 1) with 53 bits of precision.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // Uniform integer on [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n);
    // Standard normal via Box-Muller (one value per call, no caching).
    double normal();

  private:
    std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t &state);

// Seeded Fisher-Yates permutation of [0, n).
std::vector<std::size_t> permutation(std::size_t n, Rng &rng);

// Glorot-uniform bound sqrt(6 / (fan_in + fan_out)).
double xavier_bound(std::size_t fan_in, std::size_t fan_out);
void xavier_fill(std::span<double> out, std::size_t fan_in, std::size_t fan_out, Rng &rng);
// fan_out × fan_in matrix with entries uniform on [-L, +L].
Matrix xavier_init(std::size_t fan_in, std::size_t fan_out, std::uint64_t seed);

} // namespace bocr
