#include "bocr/blstm.hpp"

#include <algorithm>
#include <string>

#include "bocr/error.hpp"

namespace bocr {

BlstmModel::BlstmModel(std::size_t input_size, std::size_t hidden_size, std::size_t num_classes)
    : fwd(input_size, hidden_size), bwd(input_size, hidden_size),
      w_fy(num_classes, hidden_size), w_by(num_classes, hidden_size), b_y(num_classes, 0.0) {}

void BlstmModel::for_each_block(const std::function<void(std::span<double>)> &fn) {
    fwd.for_each_block(fn);
    bwd.for_each_block(fn);
    fn(w_fy.values());
    fn(w_by.values());
    fn(b_y);
}

void BlstmModel::for_each_block(const std::function<void(std::span<const double>)> &fn) const {
    fwd.for_each_block(fn);
    bwd.for_each_block(fn);
    fn(w_fy.values());
    fn(w_by.values());
    fn(b_y);
}

std::size_t BlstmModel::parameter_count() const {
    std::size_t n = 0;
    for_each_block([&](std::span<const double> b) { n += b.size(); });
    return n;
}

bool BlstmModel::same_shape(const BlstmModel &other) const {
    std::vector<std::size_t> a, b;
    for_each_block([&](std::span<const double> s) { a.push_back(s.size()); });
    other.for_each_block([&](std::span<const double> s) { b.push_back(s.size()); });
    return a == b && input_size() == other.input_size() && hidden_size() == other.hidden_size() &&
           num_classes() == other.num_classes();
}

namespace {

void init_bank(LstmParams &p, Rng &rng) {
    const std::size_t in = p.input_size(), h = p.hidden_size();
    for (Matrix *m : {&p.w_ix, &p.w_fx, &p.w_cx, &p.w_ox}) {
        xavier_fill(m->values(), in, h, rng);
    }
    for (Matrix *m : {&p.w_ih, &p.w_fh, &p.w_ch, &p.w_oh}) {
        xavier_fill(m->values(), h, h, rng);
    }
}

} // namespace

BlstmModel blstm_init(std::size_t input_size, std::size_t hidden_size, std::size_t num_classes,
                      std::uint64_t seed) {
    if (input_size == 0 || hidden_size == 0 || num_classes == 0) {
        throw InvalidInput("blstm_init: input, hidden and class counts must be >= 1");
    }
    BlstmModel m(input_size, hidden_size, num_classes);
    Rng rng(seed);
    init_bank(m.fwd, rng);
    init_bank(m.bwd, rng);
    xavier_fill(m.w_fy.values(), hidden_size, num_classes, rng);
    xavier_fill(m.w_by.values(), hidden_size, num_classes, rng);
    return m;
}

BlstmForwardResult blstm_forward(const BlstmModel &model, std::span<const Vector> x) {
    for (const Vector &frame : x) {
        if (frame.size() != model.input_size()) {
            throw InvalidInput("blstm_forward: frame has " + std::to_string(frame.size()) +
                               " values, model expects " + std::to_string(model.input_size()));
        }
    }
    BlstmForwardResult out;
    auto fwd = lstm_forward(model.fwd, x);
    std::vector<Vector> reversed(x.rbegin(), x.rend());
    auto bwd = lstm_forward(model.bwd, reversed);
    std::reverse(bwd.h.begin(), bwd.h.end());

    const std::size_t frames = x.size();
    const std::size_t classes = model.num_classes();
    out.logits.assign(frames, Vector(classes, 0.0));
    Vector yh1(classes), yh2(classes);
    for (std::size_t t = 0; t < frames; ++t) {
        std::fill(yh1.begin(), yh1.end(), 0.0);
        std::fill(yh2.begin(), yh2.end(), 0.0);
        gemv_accumulate(model.w_fy, fwd.h[t], yh1);
        gemv_accumulate(model.w_by, bwd.h[t], yh2);
        Vector &y = out.logits[t];
        for (std::size_t k = 0; k < classes; ++k) y[k] = yh1[k] + yh2[k] + model.b_y[k];
    }
    out.tapes.fwd = std::move(fwd.tape);
    out.tapes.bwd = std::move(bwd.tape);
    out.tapes.h_fwd = std::move(fwd.h);
    out.tapes.h_bwd = std::move(bwd.h);
    return out;
}

BlstmModel blstm_backward(const BlstmModel &model, const BlstmTapes &tapes,
                          std::span<const Vector> grad_logits) {
    const std::size_t frames = tapes.fwd.size();
    if (grad_logits.size() != frames || tapes.bwd.size() != frames ||
        tapes.h_fwd.size() != frames || tapes.h_bwd.size() != frames) {
        throw InvalidInput("blstm_backward: " + std::to_string(grad_logits.size()) +
                           " logit gradients for " + std::to_string(frames) + " frames");
    }
    const std::size_t hidden = model.hidden_size();
    BlstmModel grads(model.input_size(), hidden, model.num_classes());

    std::vector<Vector> dh_fwd(frames, Vector(hidden, 0.0));
    std::vector<Vector> dh_bwd_rev(frames, Vector(hidden, 0.0));
    for (std::size_t t = 0; t < frames; ++t) {
        const Vector &dy = grad_logits[t];
        if (dy.size() != model.num_classes()) {
            throw InvalidInput("blstm_backward: logit gradient has the wrong width");
        }
        outer_accumulate(grads.w_fy, dy, tapes.h_fwd[t]);
        outer_accumulate(grads.w_by, dy, tapes.h_bwd[t]);
        for (std::size_t k = 0; k < dy.size(); ++k) grads.b_y[k] += dy[k];
        gemv_transposed_accumulate(model.w_fy, dy, dh_fwd[t]);
        gemv_transposed_accumulate(model.w_by, dy, dh_bwd_rev[frames - 1 - t]);
    }
    lstm_backward_accumulate(model.fwd, tapes.fwd, dh_fwd, grads.fwd, nullptr);
    lstm_backward_accumulate(model.bwd, tapes.bwd, dh_bwd_rev, grads.bwd, nullptr);
    return grads;
}

} // namespace bocr
