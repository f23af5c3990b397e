#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "bocr/numeric.hpp"

namespace bocr {

// One LSTM bank without peephole connections. Gate weights are kept as
// separate input-side (W_*x, hidden × input) and recurrent-side
// (W_*h, hidden × hidden) matrices; `c` denotes the cell candidate.
struct LstmParams {
    Matrix w_ix, w_ih;
    Matrix w_fx, w_fh;
    Matrix w_cx, w_ch;
    Matrix w_ox, w_oh;
    Vector b_i, b_f, b_c, b_o;

    LstmParams() = default;
    // All-zero bank.
    LstmParams(std::size_t input_size, std::size_t hidden_size);

    std::size_t input_size() const { return w_ix.cols(); }
    std::size_t hidden_size() const { return w_ix.rows(); }

    // Visits every parameter block in the fixed serialization order:
    // (W_ix, W_ih, b_i), (W_fx, W_fh, b_f), (W_cx, W_ch, b_c), (W_ox, W_oh, b_o).
    void for_each_block(const std::function<void(std::span<double>)> &fn);
    void for_each_block(const std::function<void(std::span<const double>)> &fn) const;

    bool operator==(const LstmParams &) const = default;
};

struct LstmState {
    Vector c;
    Vector h;

    static LstmState zeros(std::size_t hidden_size) {
        return {Vector(hidden_size, 0.0), Vector(hidden_size, 0.0)};
    }
};

// Cached activations for one frame.
struct LstmTapeEntry {
    Vector x;
    Vector c_prev, h_prev;
    Vector i, f, o;
    Vector g; // tanh(cell candidate pre-activation)
    Vector c, tanh_c, h;
};

using LstmTape = std::vector<LstmTapeEntry>;

struct LstmStepResult {
    LstmState state;
    LstmTapeEntry entry;
};

LstmStepResult lstm_step(const LstmParams &params, std::span<const double> x,
                         const LstmState &prev);

struct LstmForwardResult {
    std::vector<Vector> h;
    LstmTape tape;
};

// Runs the bank left to right from a zero state.
LstmForwardResult lstm_forward(const LstmParams &params, std::span<const Vector> inputs);
LstmForwardResult lstm_forward(const LstmParams &params, std::span<const Vector> inputs,
                               const LstmState &initial);

struct LstmBackwardResult {
    LstmParams grads;
    std::vector<Vector> grad_x; // empty when input gradients were not requested
};

// Backpropagation through time for upstream gradients dL/dh_t.
LstmBackwardResult lstm_backward(const LstmParams &params, const LstmTape &tape,
                                 std::span<const Vector> grad_h, bool want_input_grad = true);

// Same, accumulating parameter gradients into `grads` (shapes must match).
void lstm_backward_accumulate(const LstmParams &params, const LstmTape &tape,
                              std::span<const Vector> grad_h, LstmParams &grads,
                              std::vector<Vector> *grad_x);

} // namespace bocr
