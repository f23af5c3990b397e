#include "bocr/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bocr/error.hpp"

namespace bocr {

LstmParams::LstmParams(std::size_t input_size, std::size_t hidden_size)
    : w_ix(hidden_size, input_size), w_ih(hidden_size, hidden_size),
      w_fx(hidden_size, input_size), w_fh(hidden_size, hidden_size),
      w_cx(hidden_size, input_size), w_ch(hidden_size, hidden_size),
      w_ox(hidden_size, input_size), w_oh(hidden_size, hidden_size),
      b_i(hidden_size, 0.0), b_f(hidden_size, 0.0), b_c(hidden_size, 0.0),
      b_o(hidden_size, 0.0) {}

void LstmParams::for_each_block(const std::function<void(std::span<double>)> &fn) {
    fn(w_ix.values()), fn(w_ih.values()), fn(b_i);
    fn(w_fx.values()), fn(w_fh.values()), fn(b_f);
    fn(w_cx.values()), fn(w_ch.values()), fn(b_c);
    fn(w_ox.values()), fn(w_oh.values()), fn(b_o);
}

void LstmParams::for_each_block(const std::function<void(std::span<const double>)> &fn) const {
    fn(w_ix.values()), fn(w_ih.values()), fn(b_i);
    fn(w_fx.values()), fn(w_fh.values()), fn(b_f);
    fn(w_cx.values()), fn(w_ch.values()), fn(b_c);
    fn(w_ox.values()), fn(w_oh.values()), fn(b_o);
}

namespace {

void check_shapes(const LstmParams &p) {
    const std::size_t h = p.hidden_size(), in = p.input_size();
    auto ok_x = [&](const Matrix &m) { return m.rows() == h && m.cols() == in; };
    auto ok_h = [&](const Matrix &m) { return m.rows() == h && m.cols() == h; };
    if (!ok_x(p.w_fx) || !ok_x(p.w_cx) || !ok_x(p.w_ox) || !ok_h(p.w_ih) || !ok_h(p.w_fh) ||
        !ok_h(p.w_ch) || !ok_h(p.w_oh) || p.b_i.size() != h || p.b_f.size() != h ||
        p.b_c.size() != h || p.b_o.size() != h) {
        throw InvalidInput("lstm: inconsistent parameter shapes");
    }
}

// Gate weights packed by input column: row j of `wx` holds the weights
// feeding all four gates from input j, laid out [i | f | c | o], so a frame
// is two transposed products over contiguous rows.
struct PackedGates {
    std::size_t input = 0, hidden = 0;
    Matrix wx; // input × 4·hidden
    Matrix wh; // hidden × 4·hidden
    Vector b;  // 4·hidden
};

PackedGates pack(const LstmParams &p) {
    PackedGates out;
    out.input = p.input_size();
    out.hidden = p.hidden_size();
    const std::size_t h = out.hidden;
    out.wx = Matrix(out.input, 4 * h);
    out.wh = Matrix(h, 4 * h);
    out.b.assign(4 * h, 0.0);
    const Matrix *xs[4] = {&p.w_ix, &p.w_fx, &p.w_cx, &p.w_ox};
    const Matrix *hs[4] = {&p.w_ih, &p.w_fh, &p.w_ch, &p.w_oh};
    const Vector *bs[4] = {&p.b_i, &p.b_f, &p.b_c, &p.b_o};
    for (std::size_t g = 0; g < 4; ++g) {
        for (std::size_t k = 0; k < h; ++k) {
            for (std::size_t j = 0; j < out.input; ++j) out.wx(j, g * h + k) = (*xs[g])(k, j);
            for (std::size_t j = 0; j < h; ++j) out.wh(j, g * h + k) = (*hs[g])(k, j);
            out.b[g * h + k] = (*bs[g])[k];
        }
    }
    return out;
}

// z = b + Wx·x + Wh·h_prev for all four gates, then the cell update.
// `z` is scratch of length 4·hidden.
void step_packed(const PackedGates &pk, std::span<const double> x, const Vector &c_prev,
                 const Vector &h_prev, LstmTapeEntry &e, Vector &z) {
    const std::size_t h = pk.hidden;
    std::copy(pk.b.begin(), pk.b.end(), z.begin());
    gemv_transposed_accumulate(pk.wx, x, z);
    gemv_transposed_accumulate(pk.wh, h_prev, z);

    e.x.assign(x.begin(), x.end());
    e.c_prev = c_prev;
    e.h_prev = h_prev;
    for (Vector *v : {&e.i, &e.f, &e.g, &e.o, &e.c, &e.tanh_c, &e.h}) v->resize(h);
    for (std::size_t k = 0; k < h; ++k) {
        e.i[k] = sigmoid(z[k]);
        e.f[k] = sigmoid(z[h + k]);
        e.g[k] = std::tanh(z[2 * h + k]);
        e.o[k] = sigmoid(z[3 * h + k]);
        e.c[k] = e.f[k] * c_prev[k] + e.i[k] * e.g[k];
        e.tanh_c[k] = std::tanh(e.c[k]);
        e.h[k] = e.o[k] * e.tanh_c[k];
    }
}

void check_step_args(const LstmParams &params, std::span<const double> x, const LstmState &s) {
    if (x.size() != params.input_size()) {
        throw InvalidInput("lstm_step: frame has " + std::to_string(x.size()) +
                           " values, expected " + std::to_string(params.input_size()));
    }
    if (s.c.size() != params.hidden_size() || s.h.size() != params.hidden_size()) {
        throw InvalidInput("lstm_step: state size does not match hidden size");
    }
}

} // namespace

LstmStepResult lstm_step(const LstmParams &params, std::span<const double> x,
                         const LstmState &prev) {
    check_shapes(params);
    check_step_args(params, x, prev);
    const PackedGates pk = pack(params);
    Vector z(4 * pk.hidden);
    LstmTapeEntry e;
    step_packed(pk, x, prev.c, prev.h, e, z);
    LstmState next{e.c, e.h};
    return {std::move(next), std::move(e)};
}

LstmForwardResult lstm_forward(const LstmParams &params, std::span<const Vector> inputs) {
    return lstm_forward(params, inputs, LstmState::zeros(params.hidden_size()));
}

LstmForwardResult lstm_forward(const LstmParams &params, std::span<const Vector> inputs,
                               const LstmState &initial) {
    check_shapes(params);
    LstmForwardResult out;
    if (inputs.empty()) return out;
    for (const Vector &x : inputs) check_step_args(params, x, initial);
    const PackedGates pk = pack(params);
    Vector z(4 * pk.hidden);
    out.h.reserve(inputs.size());
    out.tape.resize(inputs.size());
    const Vector *c = &initial.c, *h = &initial.h;
    for (std::size_t t = 0; t < inputs.size(); ++t) {
        LstmTapeEntry &e = out.tape[t];
        step_packed(pk, inputs[t], *c, *h, e, z);
        out.h.push_back(e.h);
        c = &e.c;
        h = &e.h;
    }
    return out;
}

void lstm_backward_accumulate(const LstmParams &params, const LstmTape &tape,
                              std::span<const Vector> grad_h, LstmParams &grads,
                              std::vector<Vector> *grad_x) {
    if (grad_h.size() != tape.size()) {
        throw InvalidInput("lstm_backward: " + std::to_string(grad_h.size()) +
                           " upstream gradients for a tape of " + std::to_string(tape.size()));
    }
    check_shapes(params);
    const std::size_t hidden = params.hidden_size();
    const std::size_t input = params.input_size();
    if (grads.hidden_size() != hidden || grads.input_size() != input) {
        throw InvalidInput("lstm_backward: gradient accumulator has the wrong shape");
    }
    if (grad_x) grad_x->assign(tape.size(), Vector(input, 0.0));

    // Weight gradients are gathered in the packed layout and unpacked once.
    const std::size_t w = 4 * hidden;
    Matrix gx(input, w), gh(hidden, w);
    Vector gb(w, 0.0), dz(w);
    const std::span<const double> dzi(dz.data(), hidden), dzf(dz.data() + hidden, hidden),
        dzg(dz.data() + 2 * hidden, hidden), dzo(dz.data() + 3 * hidden, hidden);
    Vector dh_next(hidden, 0.0), dc_next(hidden, 0.0);
    for (std::size_t t = tape.size(); t-- > 0;) {
        const LstmTapeEntry &e = tape[t];
        if (grad_h[t].size() != hidden) throw InvalidInput("lstm_backward: bad gradient width");
        for (std::size_t k = 0; k < hidden; ++k) {
            const double dh = grad_h[t][k] + dh_next[k];
            const double tc = e.tanh_c[k];
            const double dc = dh * e.o[k] * (1.0 - tc * tc) + dc_next[k];
            dz[3 * hidden + k] = dh * tc * e.o[k] * (1.0 - e.o[k]);
            dz[hidden + k] = dc * e.c_prev[k] * e.f[k] * (1.0 - e.f[k]);
            dz[k] = dc * e.g[k] * e.i[k] * (1.0 - e.i[k]);
            dz[2 * hidden + k] = dc * e.i[k] * (1.0 - e.g[k] * e.g[k]);
            dc_next[k] = dc * e.f[k];
        }

        outer_accumulate(gx, e.x, dz);
        outer_accumulate(gh, e.h_prev, dz);
        for (std::size_t k = 0; k < w; ++k) gb[k] += dz[k];

        std::fill(dh_next.begin(), dh_next.end(), 0.0);
        gemv_transposed_accumulate(params.w_ih, dzi, dh_next);
        gemv_transposed_accumulate(params.w_fh, dzf, dh_next);
        gemv_transposed_accumulate(params.w_ch, dzg, dh_next);
        gemv_transposed_accumulate(params.w_oh, dzo, dh_next);

        if (grad_x) {
            Vector &dx = (*grad_x)[t];
            gemv_transposed_accumulate(params.w_ix, dzi, dx);
            gemv_transposed_accumulate(params.w_fx, dzf, dx);
            gemv_transposed_accumulate(params.w_cx, dzg, dx);
            gemv_transposed_accumulate(params.w_ox, dzo, dx);
        }
    }

    Matrix *xs[4] = {&grads.w_ix, &grads.w_fx, &grads.w_cx, &grads.w_ox};
    Matrix *hs[4] = {&grads.w_ih, &grads.w_fh, &grads.w_ch, &grads.w_oh};
    Vector *bs[4] = {&grads.b_i, &grads.b_f, &grads.b_c, &grads.b_o};
    for (std::size_t g = 0; g < 4; ++g) {
        for (std::size_t k = 0; k < hidden; ++k) {
            for (std::size_t j = 0; j < input; ++j) (*xs[g])(k, j) += gx(j, g * hidden + k);
            for (std::size_t j = 0; j < hidden; ++j) (*hs[g])(k, j) += gh(j, g * hidden + k);
            (*bs[g])[k] += gb[g * hidden + k];
        }
    }
}

LstmBackwardResult lstm_backward(const LstmParams &params, const LstmTape &tape,
                                 std::span<const Vector> grad_h, bool want_input_grad) {
    LstmBackwardResult out{LstmParams(params.input_size(), params.hidden_size()), {}};
    lstm_backward_accumulate(params, tape, grad_h, out.grads,
                             want_input_grad ? &out.grad_x : nullptr);
    return out;
}

} // namespace bocr
