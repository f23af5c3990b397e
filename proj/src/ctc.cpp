#include "bocr/ctc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdint>
#include <string>
#include <unordered_map>

#include "bocr/error.hpp"

namespace bocr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_labels(std::span<const int> target, int blank, std::size_t classes) {
    if (blank < 0 || static_cast<std::size_t>(blank) >= classes) {
        throw InvalidInput("ctc: blank index " + std::to_string(blank) + " outside " +
                           std::to_string(classes) + " classes");
    }
    for (int l : target) {
        if (l < 0 || static_cast<std::size_t>(l) >= classes || l == blank) {
            throw InvalidInput("ctc: target label " + std::to_string(l) + " is out of range");
        }
    }
}

std::size_t class_count(std::span<const Vector> frames) {
    const std::size_t c = frames.front().size();
    for (const Vector &f : frames) {
        if (f.size() != c) throw InvalidInput("ctc: frames have different widths");
    }
    return c;
}

struct Lattice {
    std::vector<int> ext;            // blank-extended target
    std::vector<Vector> log_probs;   // T × C
    std::vector<Vector> alpha;       // T × S
    double log_p = kNegInf;
};

// Whether the transition s-2 -> s is allowed (skipping a blank).
bool can_skip(const std::vector<int> &ext, std::size_t s, int blank) {
    return s >= 2 && ext[s] != blank && ext[s] != ext[s - 2];
}

Lattice forward_pass(std::span<const Vector> logits, std::span<const int> target, int blank) {
    Lattice lat;
    const std::size_t frames = logits.size();
    const std::size_t classes = class_count(logits);
    check_labels(target, blank, classes);
    const std::size_t needed = ctc_min_frames(target);
    if (frames < needed) throw InfeasibleTarget(frames, needed);

    lat.ext.reserve(2 * target.size() + 1);
    lat.ext.push_back(blank);
    for (int l : target) {
        lat.ext.push_back(l);
        lat.ext.push_back(blank);
    }
    const std::size_t states = lat.ext.size();

    lat.log_probs.reserve(frames);
    for (const Vector &f : logits) lat.log_probs.push_back(log_softmax(f));

    lat.alpha.assign(frames, Vector(states, kNegInf));
    lat.alpha[0][0] = lat.log_probs[0][blank];
    if (states > 1) lat.alpha[0][1] = lat.log_probs[0][lat.ext[1]];
    for (std::size_t t = 1; t < frames; ++t) {
        const Vector &prev = lat.alpha[t - 1];
        Vector &cur = lat.alpha[t];
        // States that cannot reach the end in the remaining frames stay -inf
        // naturally; no explicit band is needed for correctness.
        for (std::size_t s = 0; s < states; ++s) {
            double a = prev[s];
            if (s >= 1) a = log_add(a, prev[s - 1]);
            if (can_skip(lat.ext, s, blank)) a = log_add(a, prev[s - 2]);
            cur[s] = a == kNegInf ? kNegInf : a + lat.log_probs[t][lat.ext[s]];
        }
    }
    const Vector &last = lat.alpha[frames - 1];
    lat.log_p = last[states - 1];
    if (states > 1) lat.log_p = log_add(lat.log_p, last[states - 2]);
    return lat;
}

} // namespace

LabelSeq collapse(std::span<const int> path, int blank) {
    LabelSeq out;
    int prev = -1;
    bool has_prev = false;
    for (int p : path) {
        if (!(has_prev && p == prev) && p != blank) out.push_back(p);
        prev = p;
        has_prev = true;
    }
    return out;
}

std::size_t ctc_min_frames(std::span<const int> target) {
    std::size_t n = target.size();
    for (std::size_t i = 1; i < target.size(); ++i) {
        if (target[i] == target[i - 1]) ++n;
    }
    return n;
}

double ctc_loss_value(std::span<const Vector> logits, std::span<const int> target, int blank) {
    if (logits.empty()) {
        if (!target.empty()) throw InfeasibleTarget(0, ctc_min_frames(target));
        return 0.0;
    }
    return -forward_pass(logits, target, blank).log_p;
}

CtcResult ctc_loss(std::span<const Vector> logits, std::span<const int> target, int blank) {
    CtcResult result;
    if (logits.empty()) {
        result.loss = ctc_loss_value(logits, target, blank);
        return result;
    }
    Lattice lat = forward_pass(logits, target, blank);
    result.loss = -lat.log_p;

    const std::size_t frames = logits.size();
    const std::size_t classes = logits.front().size();
    const std::size_t states = lat.ext.size();
    result.grad_logits.assign(frames, Vector(classes, 0.0));
    if (lat.log_p == kNegInf) {
        // Target has zero probability under these logits (underflow); the
        // loss is +inf and no meaningful gradient exists.
        return result;
    }

    // beta[s] = ln P(remaining frames | in state s at frame t), emission at t excluded.
    Vector beta(states, kNegInf), next_beta(states);
    beta[states - 1] = 0.0;
    if (states > 1) beta[states - 2] = 0.0;
    Vector posterior(classes);
    for (std::size_t t = frames; t-- > 0;) {
        if (t + 1 < frames) {
            const Vector &lp = lat.log_probs[t + 1];
            for (std::size_t s = 0; s < states; ++s) {
                double b = beta[s] == kNegInf ? kNegInf : beta[s] + lp[lat.ext[s]];
                if (s + 1 < states && beta[s + 1] != kNegInf) {
                    b = log_add(b, beta[s + 1] + lp[lat.ext[s + 1]]);
                }
                if (s + 2 < states && can_skip(lat.ext, s + 2, blank) && beta[s + 2] != kNegInf) {
                    b = log_add(b, beta[s + 2] + lp[lat.ext[s + 2]]);
                }
                next_beta[s] = b;
            }
            beta.swap(next_beta);
        }
        std::fill(posterior.begin(), posterior.end(), 0.0);
        for (std::size_t s = 0; s < states; ++s) {
            const double ab = lat.alpha[t][s] + beta[s];
            if (ab == kNegInf) continue;
            posterior[lat.ext[s]] += std::exp(ab - lat.log_p);
        }
        const Vector &lp = lat.log_probs[t];
        Vector &g = result.grad_logits[t];
        for (std::size_t k = 0; k < classes; ++k) g[k] = std::exp(lp[k]) - posterior[k];
    }
    return result;
}

double ctc_brute_force(std::span<const Vector> probs, std::span<const int> target, int blank) {
    const std::size_t frames = probs.size();
    if (frames > 8) throw InvalidInput("ctc_brute_force: at most 8 frames");
    if (frames == 0) return target.empty() ? 1.0 : 0.0;
    const std::size_t classes = class_count(probs);
    if (classes > 4) throw InvalidInput("ctc_brute_force: at most 4 classes");
    check_labels(target, blank, classes);

    std::vector<int> path(frames, 0);
    const LabelSeq want(target.begin(), target.end());
    double total = 0.0;
    while (true) {
        if (collapse(path, blank) == want) {
            double p = 1.0;
            for (std::size_t t = 0; t < frames; ++t) p *= probs[t][path[t]];
            total += p;
        }
        std::size_t t = 0;
        while (t < frames && ++path[t] == static_cast<int>(classes)) path[t++] = 0;
        if (t == frames) break;
    }
    return total;
}

LabelSeq greedy_decode(std::span<const Vector> logits, int blank) {
    std::vector<int> path;
    path.reserve(logits.size());
    for (const Vector &f : logits) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < f.size(); ++k) {
            if (f[k] > f[best]) best = k;
        }
        path.push_back(static_cast<int>(best));
    }
    return collapse(path, blank);
}

bool hypothesis_before(const BeamHypothesis &a, const BeamHypothesis &b) {
    if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
    if (a.labels.size() != b.labels.size()) return a.labels.size() < b.labels.size();
    return a.labels < b.labels;
}

namespace {

// Prefixes live in a trie so extending one costs O(1) regardless of length.
class PrefixTrie {
  public:
    PrefixTrie() : nodes_{{-1, -1, 0}} {}

    static constexpr int kRoot = 0;

    int child(int parent, int label) {
        const std::uint64_t key = (static_cast<std::uint64_t>(parent) << 32) | static_cast<std::uint32_t>(label);
        auto [it, fresh] = children_.try_emplace(key, static_cast<int>(nodes_.size()));
        if (fresh) nodes_.push_back({parent, label, nodes_[parent].length + 1});
        return it->second;
    }
    int label(int node) const { return nodes_[node].label; }
    std::size_t length(int node) const { return nodes_[node].length; }

    LabelSeq labels(int node) const {
        LabelSeq out(nodes_[node].length);
        for (std::size_t i = out.size(); i-- > 0; node = nodes_[node].parent) out[i] = nodes_[node].label;
        return out;
    }

    // Same ordering as hypothesis_before, on trie nodes.
    bool before(int a, double pa, int b, double pb) const {
        if (pa != pb) return pa > pb;
        if (length(a) != length(b)) return length(a) < length(b);
        return labels(a) < labels(b);
    }

  private:
    struct Node {
        int parent;
        int label;
        std::size_t length;
    };
    std::vector<Node> nodes_;
    std::unordered_map<std::uint64_t, int> children_;
};

} // namespace

std::vector<BeamHypothesis> beam_search(std::span<const Vector> logits, int blank,
                                        std::size_t beam_width) {
    if (beam_width == 0) throw InvalidInput("beam_decode: beam width must be >= 1");
    if (logits.empty()) return {{LabelSeq{}, 0.0}};
    const std::size_t classes = class_count(logits);
    check_labels({}, blank, classes);

    struct Mass {
        double blank = kNegInf;     // paths ending in blank
        double non_blank = kNegInf; // paths ending in the last label
    };
    struct Beam {
        int node;
        Mass mass;
    };
    struct Ranked {
        int node;
        double log_prob;
    };

    PrefixTrie trie;
    std::vector<Beam> beams{{PrefixTrie::kRoot, Mass{0.0, kNegInf}}};
    std::unordered_map<int, Mass> next;
    std::vector<Ranked> ranked;
    for (const Vector &frame : logits) {
        const Vector lp = log_softmax(frame);
        next.clear();
        for (const auto &[prefix, m] : beams) {
            const double total = log_add(m.blank, m.non_blank);
            Mass &same = next[prefix];
            same.blank = log_add(same.blank, total + lp[blank]);
            const int last = prefix == PrefixTrie::kRoot ? -1 : trie.label(prefix);
            for (std::size_t c = 0; c < classes; ++c) {
                const int label = static_cast<int>(c);
                if (label == blank) continue;
                Mass &grown = next[trie.child(prefix, label)];
                if (label == last) {
                    // Repeat only extends when separated by a blank; otherwise it
                    // folds into the existing prefix.
                    grown.non_blank = log_add(grown.non_blank, m.blank + lp[c]);
                    Mass &folded = next[prefix];
                    folded.non_blank = log_add(folded.non_blank, m.non_blank + lp[c]);
                } else {
                    grown.non_blank = log_add(grown.non_blank, total + lp[c]);
                }
            }
        }

        ranked.clear();
        for (const auto &[node, m] : next) ranked.push_back({node, log_add(m.blank, m.non_blank)});
        auto order = [&](const Ranked &a, const Ranked &b) {
            return trie.before(a.node, a.log_prob, b.node, b.log_prob);
        };
        const std::size_t keep = std::min(beam_width, ranked.size());
        std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(), order);
        ranked.resize(keep);

        beams.clear();
        for (const Ranked &r : ranked) beams.push_back({r.node, next.at(r.node)});
    }

    std::vector<BeamHypothesis> out;
    out.reserve(ranked.size());
    for (const Ranked &r : ranked) out.push_back({trie.labels(r.node), r.log_prob});
    return out;
}

LabelSeq beam_decode(std::span<const Vector> logits, int blank, std::size_t beam_width) {
    auto hyps = beam_search(logits, blank, beam_width);
    return hyps.front().labels;
}

} // namespace bocr
