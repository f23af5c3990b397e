#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "bocr/blstm.hpp"
#include "bocr/ctc.hpp"
#include "bocr/label_codec.hpp"
#include "bocr/line_preproc.hpp"
#include "bocr/synth.hpp"

namespace bocr::testing {

// Lines whose decoded output cannot flip under binary32 rounding: the best and
// runner-up beam hypotheses are at least `min_margin` apart in log-probability.
struct RecognitionFixture {
    LabelAlphabet alphabet;
    BlstmModel model;
    std::vector<GrayImage> lines;
    std::vector<double> margins;
};

inline double decision_margin(const BlstmModel &model, const LabelAlphabet &alphabet, const GrayImage &line,
                              std::size_t beam_width = kDefaultBeamWidth) {
    const auto fwd = blstm_forward(model, extract_features(normalize_line(line)));
    const auto hyps = beam_search(fwd.logits, alphabet.blank_index(), beam_width);
    if (hyps.size() < 2) return std::numeric_limits<double>::infinity();
    return hyps[0].log_prob - hyps[1].log_prob;
}

inline RecognitionFixture make_recognition_fixture(std::size_t count = 50, double min_margin = 1e-3,
                                                   std::uint64_t seed = 2024) {
    RecognitionFixture f;
    f.alphabet = synthetic_alphabet();
    f.model = blstm_init(kFeatureHeight, 32, f.alphabet.num_classes(), seed);
    const GlyphAtlas atlas = build_glyph_atlas(f.alphabet, seed);
    const auto words = generate_word_list(f.alphabet, 200, seed);
    Rng rng(seed);
    for (std::uint64_t k = 0; f.lines.size() < count; ++k) {
        const LineRecord r = render_line(atlas, f.alphabet, random_line_text(words, rng),
                                         Degradation::mild(), derive_seed(seed, k));
        const double margin = decision_margin(f.model, f.alphabet, r.image);
        if (margin < min_margin) continue;
        f.lines.push_back(r.image);
        f.margins.push_back(margin);
    }
    return f;
}

} // namespace bocr::testing
