#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "bocr/ctc.hpp"
#include "bocr/error.hpp"
#include "bocr/line_preproc.hpp"
#include "bocr/synth.hpp"
#include "bocr/trainer.hpp"

using namespace bocr;
namespace fs = std::filesystem;

namespace {

BlstmModel filled(double v) {
    BlstmModel m(1, 1, 1);
    m.for_each_block([&](std::span<double> b) { std::fill(b.begin(), b.end(), v); });
    return m;
}

struct Tiny {
    LabelAlphabet alphabet = synthetic_alphabet();
    GlyphAtlas atlas = build_glyph_atlas(alphabet, 7);
    std::vector<std::string> words = generate_word_list(alphabet, 40, 1);
    Corpus corpus = generate_corpus(atlas, alphabet, words, 9, {6, 2, 2}, Degradation::none());
};

const Tiny &tiny() {
    static const Tiny t;
    return t;
}

TrainConfig tiny_config(std::size_t epochs) {
    TrainConfig cfg;
    cfg.hidden_size = 4;
    cfg.max_epochs = epochs;
    cfg.seed = 5;
    return cfg;
}

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "bocr_trainer_test";
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path &p, const std::string &text) { std::ofstream(p, std::ios::binary) << text; }

} // namespace

TEST(Momentum, HandIteration) {
    BlstmModel theta = filled(1.0);
    Velocity v = filled(0.0);
    const BlstmModel g = filled(1.0);
    momentum_step(theta, v, g, 0.1, 0.9);
    EXPECT_DOUBLE_EQ(v.b_y[0], 1.0);
    EXPECT_DOUBLE_EQ(theta.b_y[0], 0.9);
    momentum_step(theta, v, g, 0.1, 0.9);
    EXPECT_DOUBLE_EQ(v.b_y[0], 1.9);
    EXPECT_NEAR(theta.b_y[0], 0.71, 1e-15);
    EXPECT_NEAR(theta.fwd.w_ih(0, 0), 0.71, 1e-15);
}

TEST(Momentum, ZeroMomentumIsPlainDescent) {
    Rng rng(1);
    BlstmModel theta(2, 2, 3), g(2, 2, 3);
    theta.for_each_block([&](std::span<double> b) { for (double &x : b) x = rng.uniform(-1, 1); });
    g.for_each_block([&](std::span<double> b) { for (double &x : b) x = rng.uniform(-1, 1); });
    const BlstmModel before = theta;
    Velocity v(2, 2, 3);
    momentum_step(theta, v, g, 0.05, 0.0);
    EXPECT_DOUBLE_EQ(theta.w_fy(1, 1), before.w_fy(1, 1) - 0.05 * g.w_fy(1, 1));
    EXPECT_DOUBLE_EQ(theta.bwd.b_o[0], before.bwd.b_o[0] - 0.05 * g.bwd.b_o[0]);
}

TEST(Momentum, ZeroGradientZeroVelocityIsNoOp) {
    BlstmModel theta = blstm_init(3, 2, 4, 1);
    const BlstmModel before = theta;
    Velocity v(3, 2, 4);
    momentum_step(theta, v, BlstmModel(3, 2, 4), 1e-4, 0.9);
    EXPECT_EQ(theta, before);
    EXPECT_EQ(v, BlstmModel(3, 2, 4));
}

TEST(Momentum, ShapeMismatchRejected) {
    BlstmModel theta(2, 2, 3);
    Velocity v(2, 2, 3);
    EXPECT_THROW(momentum_step(theta, v, BlstmModel(2, 3, 3), 0.1, 0.9), InvalidInput);
    Velocity wrong(2, 2, 4);
    EXPECT_THROW(momentum_step(theta, wrong, BlstmModel(2, 2, 3), 0.1, 0.9), InvalidInput);
}

TEST(StopRule, BothUnderThreshold) {
    const TrainConfig cfg;
    EXPECT_TRUE(should_stop({1, 100.0, 50.0, 0}, {2, 100.005, 50.05, 0}, cfg));
}

TEST(StopRule, ValidationOverThreshold) {
    const TrainConfig cfg;
    EXPECT_FALSE(should_stop({1, 100.0, 50.0, 0}, {2, 100.005, 50.5, 0}, cfg));
}

TEST(StopRule, LossOverThreshold) {
    const TrainConfig cfg;
    EXPECT_FALSE(should_stop({1, 100.0, 50.0, 0}, {2, 100.02, 50.05, 0}, cfg));
}

TEST(StopRule, ThresholdsAreInclusiveAndSymmetric) {
    const TrainConfig cfg;
    EXPECT_TRUE(should_stop({1, 0.5, 0.25, 0}, {2, 0.5, 0.25, 0}, cfg));
    EXPECT_TRUE(should_stop({1, 2.0, 4.0, 0}, {2, 1.995, 3.95, 0}, cfg));
}

TEST(Config, Validation) {
    TrainConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.learning_rate = 0;
    EXPECT_THROW(cfg.validate(), InvalidInput);
    cfg = {};
    cfg.momentum = 1.0;
    EXPECT_THROW(cfg.validate(), InvalidInput);
    cfg = {};
    cfg.max_epochs = 0;
    EXPECT_THROW(cfg.validate(), InvalidInput);
    cfg = {};
    cfg.grad_clip = -1.0;
    EXPECT_THROW(cfg.validate(), InvalidInput);
}

TEST(Config, PaperDefaults) {
    const TrainConfig cfg;
    EXPECT_EQ(cfg.learning_rate, 1e-4);
    EXPECT_EQ(cfg.momentum, 0.9);
    EXPECT_EQ(cfg.max_epochs, 80u);
    EXPECT_EQ(cfg.loss_delta_stop, 0.01);
    EXPECT_EQ(cfg.val_delta_stop, 0.1);
    EXPECT_EQ(cfg.hidden_size, 128u);
    EXPECT_FALSE(cfg.grad_clip.has_value());
}

TEST(Train, SingleEpochGivesOneReport) {
    const auto &t = tiny();
    const TrainResult r = train(t.corpus.train, t.corpus.val, t.alphabet, tiny_config(1));
    ASSERT_EQ(r.reports.size(), 1u);
    EXPECT_EQ(r.reports[0].epoch, 1u);
    EXPECT_EQ(r.best_epoch, 1u);
    EXPECT_GT(r.reports[0].train_ctc_loss, 0.0);
    EXPECT_GT(r.reports[0].val_error, 0.0);
}

TEST(Train, SingleLineOverfitLossFallsForFiveEpochs) {
    const auto &t = tiny();
    const std::vector<LineRecord> one{t.corpus.train[0]};
    const TrainResult r = train(one, {}, t.alphabet, tiny_config(30));
    ASSERT_GE(r.reports.size(), 6u);
    for (std::size_t e = 1; e <= 5; ++e) {
        EXPECT_LT(r.reports[e].train_ctc_loss, r.reports[e - 1].train_ctc_loss) << "epoch " << e + 1;
    }
}

TEST(Train, MatchesManualDescentWithoutMomentum) {
    const auto &t = tiny();
    std::vector<SkippedLine> skipped;
    const auto lines = prepare_lines({t.corpus.train[1]}, t.alphabet, skipped);
    ASSERT_EQ(lines.size(), 1u);
    TrainConfig cfg = tiny_config(2);
    cfg.momentum = 0.0;
    cfg.learning_rate = 1e-3;
    const BlstmModel init = blstm_init(kFeatureHeight, 4, t.alphabet.num_classes(), 5);
    const int blank = t.alphabet.blank_index();

    BlstmModel manual = init;
    for (int step = 0; step < 2; ++step) {
        const auto fwd = blstm_forward(manual, lines[0].features);
        const auto ctc = ctc_loss(fwd.logits, lines[0].target, blank);
        const BlstmModel g = blstm_backward(manual, fwd.tapes, ctc.grad_logits);
        std::vector<std::vector<double>> gblocks;
        g.for_each_block([&](std::span<const double> b) { gblocks.emplace_back(b.begin(), b.end()); });
        std::size_t k = 0;
        manual.for_each_block([&](std::span<double> b) {
            for (std::size_t i = 0; i < b.size(); ++i) b[i] -= cfg.learning_rate * gblocks[k][i];
            ++k;
        });
    }

    const TrainResult r = train_from(init, lines, {}, blank, cfg);
    ASSERT_EQ(r.reports.size(), 2u);
    ASSERT_EQ(r.best_epoch, 2u);
    EXPECT_EQ(r.model, manual);
}

TEST(Train, DeterministicTrajectory) {
    const auto &t = tiny();
    const TrainResult a = train(t.corpus.train, t.corpus.val, t.alphabet, tiny_config(3));
    const TrainResult b = train(t.corpus.train, t.corpus.val, t.alphabet, tiny_config(3));
    EXPECT_EQ(a.model, b.model);
    EXPECT_EQ(a.best_epoch, b.best_epoch);
    ASSERT_EQ(a.reports.size(), b.reports.size());
    for (std::size_t i = 0; i < a.reports.size(); ++i) {
        EXPECT_EQ(a.reports[i].train_ctc_loss, b.reports[i].train_ctc_loss);
        EXPECT_EQ(a.reports[i].val_error, b.reports[i].val_error);
    }
}

TEST(Train, ReturnsArgminOfValidationError) {
    const auto &t = tiny();
    TrainConfig cfg = tiny_config(6);
    cfg.learning_rate = 0.02; // large enough that validation error moves both ways
    const TrainResult r = train(t.corpus.train, t.corpus.val, t.alphabet, cfg);
    const auto best = std::min_element(r.reports.begin(), r.reports.end(),
                                       [](const auto &x, const auto &y) { return x.val_error < y.val_error; });
    EXPECT_EQ(r.best_epoch, best->epoch);
    std::vector<SkippedLine> skipped;
    const auto val = prepare_lines(t.corpus.val, t.alphabet, skipped);
    EXPECT_EQ(summed_ctc_loss(r.model, val, t.alphabet.blank_index()), best->val_error);
}

TEST(Train, GradientClipChangesTrajectory) {
    const auto &t = tiny();
    TrainConfig cfg = tiny_config(1);
    const TrainResult plain = train(t.corpus.train, {}, t.alphabet, cfg);
    cfg.grad_clip = 1e-3;
    const TrainResult clipped = train(t.corpus.train, {}, t.alphabet, cfg);
    EXPECT_FALSE(plain.model == clipped.model);
}

TEST(Train, EmptyTrainingSetRejected) {
    EXPECT_THROW(train({}, {}, tiny().alphabet, tiny_config(1)), InvalidInput);
    EXPECT_THROW(train_from(BlstmModel(48, 2, 21), {}, {}, 20, tiny_config(1)), InvalidInput);
}

TEST(Train, BadLinesAreSkippedAndReported) {
    const auto &t = tiny();
    std::vector<LineRecord> set{t.corpus.train[0]};
    LineRecord foreign = t.corpus.train[1];
    foreign.id = "foreign";
    foreign.truth = "xyz";
    set.push_back(foreign);
    LineRecord squeezed = t.corpus.train[2];
    squeezed.id = "squeezed";
    squeezed.image = GrayImage(2, 48, 255);
    set.push_back(squeezed);

    const TrainResult r = train(set, {}, t.alphabet, tiny_config(1));
    ASSERT_EQ(r.skipped.size(), 2u);
    EXPECT_EQ(r.skipped[0].id, "foreign");
    EXPECT_NE(r.skipped[0].reason.find("U+0078"), std::string::npos);
    EXPECT_EQ(r.skipped[1].id, "squeezed");
}

TEST(Train, VelocityShapesMirrorModel) {
    BlstmModel m = blstm_init(5, 3, 4, 1);
    Velocity v(5, 3, 4);
    for (int k = 0; k < 5; ++k) momentum_step(m, v, blstm_init(5, 3, 4, k), 0.01, 0.9);
    EXPECT_TRUE(v.same_shape(m));
}

TEST(EpochCsv, HeaderOnceThenRows) {
    const fs::path p = temp_dir() / "report.csv";
    fs::remove(p);
    append_epoch_csv(p.string(), {1, 12.5, 3.25, 0.5});
    append_epoch_csv(p.string(), {2, 10.0, 3.0, 0.25});
    std::ifstream in(p);
    std::string l1, l2, l3;
    std::getline(in, l1);
    std::getline(in, l2);
    std::getline(in, l3);
    EXPECT_EQ(l1, "epoch,train_ctc_loss,val_error,wall_time_s");
    EXPECT_EQ(l2, "1,12.500000,3.250000,0.500");
    EXPECT_EQ(l3, "2,10.000000,3.000000,0.250");
}

TEST(Manifest, RelativePathsResolveAgainstManifestDir) {
    const fs::path dir = temp_dir() / "m1";
    fs::create_directories(dir / "lines");
    write_pgm(GrayImage(4, 48, 255), (dir / "lines" / "a.pgm").string());
    write_file(dir / "lines" / "a.gt.txt", "\xE0\xA6\x95 \xE0\xA6\x96\r\n");
    write_file(dir / "train.tsv", "lines/a.pgm\tlines/a.gt.txt\n\n");
    const auto entries = read_manifest((dir / "train.tsv").string());
    ASSERT_EQ(entries.size(), 1u);
    EXPECT_EQ(fs::path(entries[0].image_path), dir / "lines" / "a.pgm");
    const auto records = load_manifest_records((dir / "train.tsv").string());
    ASSERT_EQ(records.size(), 1u);
    EXPECT_EQ(records[0].id, "a");
    EXPECT_EQ(records[0].truth, "\xE0\xA6\x95 \xE0\xA6\x96");
    EXPECT_EQ(records[0].image.width(), 4u);
}

TEST(Manifest, RoundTripAndErrors) {
    const fs::path dir = temp_dir() / "m2";
    fs::create_directories(dir);
    const std::vector<ManifestEntry> entries{{"/abs/x.pgm", "/abs/x.gt.txt"}, {"/abs/y.png", "/abs/y.txt"}};
    write_manifest((dir / "m.tsv").string(), entries);
    const auto back = read_manifest((dir / "m.tsv").string());
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1].image_path, "/abs/y.png");
    EXPECT_EQ(back[1].truth_path, "/abs/y.txt");

    write_file(dir / "bad.tsv", "only-one-column\n");
    EXPECT_THROW(read_manifest((dir / "bad.tsv").string()), ManifestError);
    EXPECT_THROW(read_manifest((dir / "absent.tsv").string()), IoError);
}

TEST(Manifest, TruthFileStripsOneNewline) {
    const fs::path dir = temp_dir();
    write_file(dir / "t1.txt", "abc\n\n");
    write_file(dir / "t2.txt", "abc");
    write_file(dir / "t3.txt", "abc\r");
    EXPECT_EQ(read_truth_file((dir / "t1.txt").string()), "abc\n");
    EXPECT_EQ(read_truth_file((dir / "t2.txt").string()), "abc");
    EXPECT_EQ(read_truth_file((dir / "t3.txt").string()), "abc\r");
}
