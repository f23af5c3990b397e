#include <gtest/gtest.h>

#include "bocr/error.hpp"
#include "bocr/pipeline.hpp"
#include "bocr/trainer.hpp"
#include "bocr/utf8.hpp"
#include "support/oracles.hpp"

using namespace bocr;
using namespace bocr::testing;

TEST(Recognize, ZeroModelSingleFrameGivesEmptyText) {
    const LabelAlphabet a = synthetic_alphabet();
    const BlstmModel zero(kFeatureHeight, 4, a.num_classes());
    // One frame: every class and the empty string tie at 1/21; shorter wins.
    EXPECT_EQ(recognize_features(zero, a, FeatureSequence(1, Vector(kFeatureHeight, 0.0))), "");
    // A 48 × 1 image normalizes to a single frame.
    EXPECT_EQ(recognize_line(zero, a, GrayImage(1, 48, 255)), "");
}

TEST(Recognize, AgreesWithExhaustiveSearchOnShortInputs) {
    const LabelAlphabet a = load_alphabet("a\nb\n", true);
    Rng rng(17);
    for (int trial = 0; trial < 60; ++trial) {
        BlstmModel m(5, 3, a.num_classes());
        randomize(m, rng, 1.5);
        const std::size_t t = 1 + rng.below(4);
        const FeatureSequence x = random_sequence(t, 5, rng, 0.0, 1.0);
        const auto logits = blstm_forward(m, x).logits;
        const LabelSeq best = exhaustive_argmax(logits, a.blank_index());
        EXPECT_EQ(recognize_features(m, a, x, 100), decode_labels(a, best)) << "trial " << trial;
    }
}

TEST(Recognize, RejectsDegenerateInputs) {
    const LabelAlphabet a = synthetic_alphabet();
    const BlstmModel m(kFeatureHeight, 2, a.num_classes());
    EXPECT_THROW(recognize_line(m, a, GrayImage(1, 200, 255)), InvalidInput);
    EXPECT_THROW(recognize_line(BlstmModel(40, 2, a.num_classes()), a, GrayImage(10, 48, 255)), InvalidInput);
    EXPECT_THROW(recognize_line(BlstmModel(kFeatureHeight, 2, 5), a, GrayImage(10, 48, 255)), InvalidInput);
}

TEST(Recognize, OverfitModelReadsItsTrainingLine) {
    const LabelAlphabet a = synthetic_alphabet();
    const GlyphAtlas atlas = build_glyph_atlas(a, 3);
    const std::string text = utf8::encode(std::u32string{a.symbols()[0], a.symbols()[5], U' ', a.symbols()[9]});
    const LineRecord line = render_line(atlas, a, text, Degradation::none(), 1, "only");
    TrainConfig cfg;
    cfg.hidden_size = 8;
    cfg.learning_rate = 1e-2;
    cfg.max_epochs = 150;
    cfg.loss_delta_stop = -1.0; // never stop early
    const TrainResult r = train({line}, {}, a, cfg);
    EXPECT_EQ(recognize_line(r.model, a, line.image), text);
}
