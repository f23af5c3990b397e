#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bocr/lstm.hpp"
#include "bocr/numeric.hpp"

namespace bocr {

inline constexpr std::size_t kFeatureHeight = 48;
inline constexpr std::size_t kDefaultHidden = 128;
inline constexpr std::size_t kDefaultClasses = 166;

using FeatureSequence = std::vector<Vector>;
using LogitSequence = std::vector<Vector>;

// Single bidirectional hidden layer followed by a per-frame linear map onto
// class logits: y_t = W_fy·h→_t + W_by·h←_t + b_y.
struct BlstmModel {
    LstmParams fwd;
    LstmParams bwd;
    Matrix w_fy; // num_classes × hidden
    Matrix w_by; // num_classes × hidden
    Vector b_y;

    BlstmModel() = default;
    // All-zero model.
    BlstmModel(std::size_t input_size, std::size_t hidden_size, std::size_t num_classes);

    std::size_t input_size() const { return fwd.input_size(); }
    std::size_t hidden_size() const { return fwd.hidden_size(); }
    std::size_t num_classes() const { return b_y.size(); }

    // Serialization order: fwd blocks, bwd blocks, W_fy, W_by, b_y.
    void for_each_block(const std::function<void(std::span<double>)> &fn);
    void for_each_block(const std::function<void(std::span<const double>)> &fn) const;
    std::size_t parameter_count() const;

    // True when every tensor has the same shape as in `other`.
    bool same_shape(const BlstmModel &other) const;

    bool operator==(const BlstmModel &) const = default;
};

// Xavier-uniform weights (per-matrix fans), zero biases, one seeded stream.
BlstmModel blstm_init(std::size_t input_size, std::size_t hidden_size, std::size_t num_classes,
                      std::uint64_t seed);

struct BlstmTapes {
    LstmTape fwd;
    LstmTape bwd; // in reversed time order, as the backward bank saw it
    std::vector<Vector> h_fwd;
    std::vector<Vector> h_bwd; // re-reversed to natural order
};

struct BlstmForwardResult {
    LogitSequence logits;
    BlstmTapes tapes;
};

BlstmForwardResult blstm_forward(const BlstmModel &model, std::span<const Vector> x);

// Gradients for every field, returned as a model-shaped container.
BlstmModel blstm_backward(const BlstmModel &model, const BlstmTapes &tapes,
                          std::span<const Vector> grad_logits);

} // namespace bocr
