#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "bocr/error.hpp"
#include "bocr/evaluator.hpp"
#include "bocr/image.hpp"
#include "bocr/label_codec.hpp"
#include "bocr/line_preproc.hpp"
#include "bocr/model_io.hpp"
#include "bocr/pipeline.hpp"
#include "bocr/synth.hpp"
#include "bocr/trainer.hpp"

namespace fs = std::filesystem;
using namespace bocr;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

constexpr std::size_t kSynthWordCount = 300;

// Option value rejected after parsing.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_text(const fs::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
}

void make_dir(const fs::path &dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

Degradation parse_degradation(const std::string &spec) {
    if (spec == "none") return Degradation::none();
    if (spec == "mild") return Degradation::mild();
    Degradation d;
    char comma1 = 0, comma2 = 0;
    std::istringstream in(spec);
    if (!(in >> d.noise_sigma >> comma1 >> d.scale_jitter >> comma2 >> d.baseline_jitter) || comma1 != ',' ||
        comma2 != ',' || !in.eof()) {
        throw UsageError("--degrade expects none, mild or SIGMA,SCALE,JITTER");
    }
    if (d.noise_sigma < 0 || d.noise_sigma > 20 || d.scale_jitter < 0 || d.scale_jitter > 0.25 ||
        d.baseline_jitter > 2) {
        throw UsageError("--degrade limits: sigma <= 20, scale <= 0.25, jitter <= 2");
    }
    return d;
}

CorpusCounts parse_counts(const std::string &spec) {
    CorpusCounts c;
    char comma1 = 0, comma2 = 0;
    std::istringstream in(spec);
    if (!(in >> c.train >> comma1 >> c.val >> comma2 >> c.test) || comma1 != ',' || comma2 != ',' ||
        !in.eof()) {
        throw UsageError("--counts expects TRAIN,VAL,TEST");
    }
    return c;
}

void write_split(const fs::path &out_dir, const std::string &name, const std::vector<LineRecord> &lines) {
    make_dir(out_dir / name);
    std::vector<ManifestEntry> entries;
    for (const LineRecord &r : lines) {
        const fs::path image = fs::path(name) / (r.id + ".pgm");
        const fs::path truth = fs::path(name) / (r.id + ".gt.txt");
        write_pgm(r.image, (out_dir / image).string());
        write_text(out_dir / truth, r.truth + "\n");
        entries.push_back({image.string(), truth.string()});
    }
    write_manifest((out_dir / (name + ".tsv")).string(), entries);
}

int run_segment(const std::string &page_path, const std::string &out_dir, std::size_t strips, bool emit_boxes) {
    const GrayImage page = read_image(page_path);
    SegmentConfig cfg;
    cfg.strips = strips;
    const auto boxes = segment_lines(page, cfg);
    make_dir(out_dir);
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const LineBox &b = boxes[i];
        char name[32];
        std::snprintf(name, sizeof name, "line-%04zu.pgm", i + 1);
        write_pgm(page.crop(b.left, b.top, b.right, b.bottom), (fs::path(out_dir) / name).string());
        if (emit_boxes) std::cout << name << '\t' << b.top << '\t' << b.bottom << '\t' << b.left << '\t' << b.right << '\n';
    }
    std::cerr << boxes.size() << " line(s) written to " << out_dir << '\n';
    return kExitOk;
}

int run_synth(const std::string &alphabet_path, bool relaxed, const std::string &counts_spec, std::uint64_t seed,
              const std::string &out_dir, const std::string &degrade_spec, std::size_t pages) {
    const LabelAlphabet alphabet = load_alphabet_file(alphabet_path, relaxed);
    const CorpusCounts counts = parse_counts(counts_spec);
    const Degradation degrade = parse_degradation(degrade_spec);
    const GlyphAtlas atlas = build_glyph_atlas(alphabet, seed);
    const auto words = generate_word_list(alphabet, kSynthWordCount, derive_seed(seed, 1));
    const Corpus corpus = generate_corpus(atlas, alphabet, words, derive_seed(seed, 2), counts, degrade);

    const fs::path root(out_dir);
    make_dir(root);
    write_split(root, "train", corpus.train);
    write_split(root, "val", corpus.val);
    write_split(root, "test", corpus.test);
    if (pages > 0) {
        make_dir(root / "pages");
        Rng rng(derive_seed(seed, 3));
        for (std::size_t p = 0; p < pages; ++p) {
            const std::size_t lines = 2 + rng.below(9);
            const SyntheticPage page = compose_page(atlas, alphabet, words, lines, degrade, derive_seed(seed, 4, p));
            char stem[32];
            std::snprintf(stem, sizeof stem, "page-%04zu", p + 1);
            write_pgm(page.image, (root / "pages" / (std::string(stem) + ".pgm")).string());
            std::string boxes;
            for (std::size_t i = 0; i < page.lines.size(); ++i) {
                const LineBox &b = page.lines[i];
                boxes += std::to_string(b.top) + '\t' + std::to_string(b.bottom) + '\t' + std::to_string(b.left) +
                         '\t' + std::to_string(b.right) + '\t' + page.texts[i] + '\n';
            }
            write_text(root / "pages" / (std::string(stem) + ".boxes.tsv"), boxes);
        }
    }
    std::cerr << counts.train << '/' << counts.val << '/' << counts.test << " lines written to " << out_dir << '\n';
    return kExitOk;
}

int run_train(const std::string &manifest, const std::string &val_manifest, const std::string &alphabet_path,
              bool relaxed, const TrainConfig &cfg, const std::string &out, const std::string &report) {
    try {
        cfg.validate();
    } catch (const InvalidInput &e) {
        throw UsageError(e.what());
    }
    const LabelAlphabet alphabet = load_alphabet_file(alphabet_path, relaxed);
    const auto train_set = load_manifest_records(manifest);
    const auto val_set = val_manifest.empty() ? std::vector<LineRecord>{} : load_manifest_records(val_manifest);

    std::error_code ec;
    fs::remove(report, ec);
    const TrainResult result = train(train_set, val_set, alphabet, cfg, [&](const EpochReport &r) {
        append_epoch_csv(report, r);
        std::fprintf(stderr, "epoch %3zu  train %.4f  val %.4f  %.1fs\n", r.epoch, r.train_ctc_loss, r.val_error,
                     r.wall_time);
    });
    for (const SkippedLine &s : result.skipped) std::cerr << "skipped " << s.id << ": " << s.reason << '\n';
    save_model(result.model, alphabet, out);
    std::cerr << "best epoch " << result.best_epoch << ", model written to " << out << '\n';
    return kExitOk;
}

int run_recognize(const std::string &model_path, const std::vector<std::string> &images, std::size_t beam) {
    const LoadedModel m = load_model(model_path);
    for (const std::string &path : images) {
        const std::string text = recognize_line(m.model, m.alphabet, read_image(path), beam);
        if (images.size() > 1) std::cout << path << '\t';
        std::cout << text << '\n';
    }
    return kExitOk;
}

int run_evaluate(const std::string &model_path, const std::string &manifest, const std::string &report,
                 std::size_t beam) {
    const LoadedModel m = load_model(model_path);
    std::vector<ScoredPair> pairs;
    for (const LineRecord &r : load_manifest_records(manifest)) {
        pairs.push_back({r.id, recognize_line(m.model, m.alphabet, r.image, beam), r.truth});
    }
    const EvalReport result = score_corpus(pairs);
    write_text(report, eval_csv(result));
    std::cout << eval_summary(result);
    return kExitOk;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Printed-text line OCR: segmentation, synthesis, training, recognition and scoring"};
    app.require_subcommand(1);

    std::string page, out_dir;
    std::size_t strips = SegmentConfig{}.strips;
    bool emit_boxes = false;
    auto *segment = app.add_subcommand("segment", "Split a page image into line images");
    segment->add_option("page", page, "Page image (PGM or grayscale PNG)")->required();
    segment->add_option("--out-dir", out_dir, "Directory for line-NNNN.pgm files")->required();
    segment->add_option("--strips", strips, "Vertical strips for the projection profile")->check(CLI::PositiveNumber);
    segment->add_flag("--emit-boxes", emit_boxes, "Print name, top, bottom, left, right per line");

    std::string alphabet_path, counts, degrade = "none";
    std::uint64_t seed = 1;
    std::size_t pages = 0;
    bool relaxed = false;
    auto *synth = app.add_subcommand("synth", "Generate a synthetic line corpus");
    synth->add_option("--alphabet", alphabet_path, "Alphabet manifest")->required();
    synth->add_option("--counts", counts, "TRAIN,VAL,TEST line counts")->required();
    synth->add_option("--seed", seed, "Generator seed");
    synth->add_option("--out-dir", out_dir, "Output directory")->required();
    synth->add_option("--degrade", degrade, "none, mild or SIGMA,SCALE,JITTER");
    synth->add_option("--pages", pages, "Also compose this many multi-line pages");
    synth->add_flag("--relaxed", relaxed, "Accept an alphabet of any size");

    std::string manifest, val_manifest, model_out, report;
    TrainConfig cfg;
    double grad_clip = 0.0;
    auto *train_cmd = app.add_subcommand("train", "Train a model from line manifests");
    train_cmd->add_option("--manifest", manifest, "Training manifest")->required();
    train_cmd->add_option("--val", val_manifest, "Validation manifest");
    train_cmd->add_option("--alphabet", alphabet_path, "Alphabet manifest")->required();
    train_cmd->add_flag("--relaxed", relaxed, "Accept an alphabet of any size");
    train_cmd->add_option("--hidden", cfg.hidden_size, "LSTM units per direction");
    train_cmd->add_option("--lr", cfg.learning_rate, "Learning rate");
    train_cmd->add_option("--momentum", cfg.momentum, "Momentum");
    train_cmd->add_option("--max-epochs", cfg.max_epochs, "Epoch limit");
    train_cmd->add_option("--seed", cfg.seed, "Initialisation and shuffling seed");
    train_cmd->add_option("--grad-clip", grad_clip, "Clip the global gradient norm (off by default)");
    train_cmd->add_option("--out", model_out, "Model file to write")->required();
    train_cmd->add_option("--report", report, "Per-epoch CSV report")->required();

    std::string model_path;
    std::vector<std::string> images;
    std::size_t beam = kDefaultBeamWidth;
    auto *recognize = app.add_subcommand("recognize", "Recognize line images");
    recognize->add_option("--model", model_path, "Model file")->required();
    recognize->add_option("images", images, "Line images")->required();
    recognize->add_option("--beam", beam, "Beam width")->check(CLI::PositiveNumber);

    auto *evaluate = app.add_subcommand("evaluate", "Score a model on a test manifest");
    evaluate->add_option("--model", model_path, "Model file")->required();
    evaluate->add_option("--manifest", manifest, "Test manifest")->required();
    evaluate->add_option("--report", report, "Per-line CSV report")->required();
    evaluate->add_option("--beam", beam, "Beam width")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*segment) return run_segment(page, out_dir, strips, emit_boxes);
        if (*synth) return run_synth(alphabet_path, relaxed, counts, seed, out_dir, degrade, pages);
        if (*train_cmd) {
            if (grad_clip > 0.0) cfg.grad_clip = grad_clip;
            return run_train(manifest, val_manifest, alphabet_path, relaxed, cfg, model_out, report);
        }
        if (*recognize) return run_recognize(model_path, images, beam);
        if (*evaluate) return run_evaluate(model_path, manifest, report, beam);
    } catch (const UsageError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const bocr::Error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception &e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitInternal;
}
