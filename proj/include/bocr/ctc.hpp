#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bocr/blstm.hpp"
#include "bocr/numeric.hpp"

namespace bocr {

using LabelSeq = std::vector<int>;

// Merges adjacent repeats, then removes blanks.
LabelSeq collapse(std::span<const int> path, int blank);

// Fewest frames a target can be aligned to: |l| plus one separating blank
// for every adjacent equal pair.
std::size_t ctc_min_frames(std::span<const int> target);

struct CtcResult {
    double loss = 0.0;           // -ln P(target | logits), natural log
    LogitSequence grad_logits;   // d loss / d logits
};

// Forward-backward over the blank-extended target, in log space.
// Throws InfeasibleTarget when there are fewer frames than ctc_min_frames.
CtcResult ctc_loss(std::span<const Vector> logits, std::span<const int> target, int blank);
// Loss only; skips the backward recursion.
double ctc_loss_value(std::span<const Vector> logits, std::span<const int> target, int blank);

// Exhaustive path sum over all num_classes^T paths. Test oracle; limited to
// T <= 8 and at most 4 classes.
double ctc_brute_force(std::span<const Vector> probs, std::span<const int> target, int blank);

// Best path: per-frame argmax (lowest index on ties), then collapse.
LabelSeq greedy_decode(std::span<const Vector> logits, int blank);

struct BeamHypothesis {
    LabelSeq labels;
    double log_prob; // ln P(labels | logits) restricted to the surviving beam
};

// Prefix beam search; hypotheses best first. Ordering: higher probability,
// then shorter prefix, then lexicographically smaller labels.
std::vector<BeamHypothesis> beam_search(std::span<const Vector> logits, int blank,
                                        std::size_t beam_width);
LabelSeq beam_decode(std::span<const Vector> logits, int blank, std::size_t beam_width);

// Strict weak ordering used by the decoder to rank hypotheses.
bool hypothesis_before(const BeamHypothesis &a, const BeamHypothesis &b);

inline constexpr std::size_t kDefaultBeamWidth = 10;

} // namespace bocr
