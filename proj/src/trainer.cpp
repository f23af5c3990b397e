#include "bocr/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "bocr/ctc.hpp"
#include "bocr/error.hpp"
#include "bocr/line_preproc.hpp"

namespace bocr {

namespace fs = std::filesystem;

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw InvalidInput("learning rate must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw InvalidInput("momentum must be in [0, 1)");
    if (max_epochs < 1) throw InvalidInput("max_epochs must be >= 1");
    if (hidden_size < 1) throw InvalidInput("hidden size must be >= 1");
    if (grad_clip && !(*grad_clip > 0.0)) throw InvalidInput("gradient clip must be > 0");
}

namespace {

std::vector<std::span<double>> blocks_of(BlstmModel &m) {
    std::vector<std::span<double>> out;
    m.for_each_block([&](std::span<double> b) { out.push_back(b); });
    return out;
}

std::vector<std::span<const double>> blocks_of(const BlstmModel &m) {
    std::vector<std::span<const double>> out;
    m.for_each_block([&](std::span<const double> b) { out.push_back(b); });
    return out;
}

void clip_global_norm(BlstmModel &grads, double max_norm) {
    double sq = 0.0;
    for (auto b : blocks_of(static_cast<const BlstmModel &>(grads))) {
        for (double v : b) sq += v * v;
    }
    const double norm = std::sqrt(sq);
    if (norm <= max_norm) return;
    const double scale = max_norm / norm;
    for (auto b : blocks_of(grads)) {
        for (double &v : b) v *= scale;
    }
}

} // namespace

void momentum_step(BlstmModel &model, Velocity &velocity, const BlstmModel &grads, double lr,
                   double mu) {
    if (!model.same_shape(velocity) || !model.same_shape(grads)) {
        throw InvalidInput("momentum_step: model, velocity and gradient shapes differ");
    }
    auto theta = blocks_of(model);
    auto vel = blocks_of(velocity);
    auto g = blocks_of(grads);
    for (std::size_t b = 0; b < theta.size(); ++b) {
        for (std::size_t i = 0; i < theta[b].size(); ++i) {
            vel[b][i] = mu * vel[b][i] + g[b][i];
            theta[b][i] -= lr * vel[b][i];
        }
    }
}

bool should_stop(const EpochReport &prev, const EpochReport &curr, const TrainConfig &cfg) {
    return std::abs(curr.train_ctc_loss - prev.train_ctc_loss) <= cfg.loss_delta_stop &&
           std::abs(curr.val_error - prev.val_error) <= cfg.val_delta_stop;
}

std::vector<PreparedLine> prepare_lines(const std::vector<LineRecord> &records,
                                        const LabelAlphabet &alphabet,
                                        std::vector<SkippedLine> &skipped) {
    std::vector<PreparedLine> out;
    out.reserve(records.size());
    for (const LineRecord &r : records) {
        PreparedLine p{r.id, {}, {}};
        try {
            p.target = encode_text(alphabet, r.truth);
        } catch (const Error &e) {
            skipped.push_back({r.id, e.what()});
            continue;
        }
        p.features = extract_features(normalize_line(r.image));
        const std::size_t need = ctc_min_frames(p.target);
        if (p.features.size() < need) {
            skipped.push_back({r.id, "line has " + std::to_string(p.features.size()) +
                                         " frames but its text needs " + std::to_string(need)});
            continue;
        }
        out.push_back(std::move(p));
    }
    return out;
}

double summed_ctc_loss(const BlstmModel &model, const std::vector<PreparedLine> &lines, int blank) {
    double total = 0.0;
    for (const PreparedLine &line : lines) {
        const auto fwd = blstm_forward(model, line.features);
        const double loss = ctc_loss_value(fwd.logits, line.target, blank);
        if (std::isfinite(loss)) total += loss;
    }
    return total;
}

TrainResult train_from(BlstmModel initial, const std::vector<PreparedLine> &train_lines,
                       const std::vector<PreparedLine> &val_lines, int blank,
                       const TrainConfig &cfg, const EpochCallback &on_epoch) {
    cfg.validate();
    if (train_lines.empty()) throw InvalidInput("train: training set is empty");

    TrainResult result;
    BlstmModel model = std::move(initial);
    Velocity velocity(model.input_size(), model.hidden_size(), model.num_classes());
    Rng order_rng(derive_seed(cfg.seed, 0x5eed));
    double best = std::numeric_limits<double>::infinity();

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        std::vector<std::size_t> order;
        if (cfg.shuffle) {
            order = permutation(train_lines.size(), order_rng);
        } else {
            for (std::size_t i = 0; i < train_lines.size(); ++i) order.push_back(i);
        }

        EpochReport report;
        report.epoch = epoch;
        for (std::size_t idx : order) {
            const PreparedLine &line = train_lines[idx];
            const auto fwd = blstm_forward(model, line.features);
            CtcResult ctc = ctc_loss(fwd.logits, line.target, blank);
            if (!std::isfinite(ctc.loss)) {
                if (epoch == 1) result.skipped.push_back({line.id, "non-finite CTC loss"});
                continue;
            }
            report.train_ctc_loss += ctc.loss;
            BlstmModel grads = blstm_backward(model, fwd.tapes, ctc.grad_logits);
            if (cfg.grad_clip) clip_global_norm(grads, *cfg.grad_clip);
            momentum_step(model, velocity, grads, cfg.learning_rate, cfg.momentum);
        }
        report.val_error = summed_ctc_loss(model, val_lines, blank);
        report.wall_time =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        // Without a validation set the training loss drives model selection.
        const double metric = val_lines.empty() ? report.train_ctc_loss : report.val_error;
        if (metric < best) {
            best = metric;
            result.model = model;
            result.best_epoch = epoch;
        }
        result.reports.push_back(report);
        if (on_epoch) on_epoch(report);
        if (result.reports.size() >= 2 &&
            should_stop(result.reports[result.reports.size() - 2], report, cfg)) {
            break;
        }
    }
    if (result.best_epoch == 0) {
        // Every epoch produced a non-finite metric; fall back to the last model.
        result.model = std::move(model);
        result.best_epoch = result.reports.size();
    }
    return result;
}

TrainResult train(const std::vector<LineRecord> &train_set, const std::vector<LineRecord> &val_set,
                  const LabelAlphabet &alphabet, const TrainConfig &cfg,
                  const EpochCallback &on_epoch) {
    cfg.validate();
    if (train_set.empty()) throw InvalidInput("train: training set is empty");
    std::vector<SkippedLine> skipped;
    auto train_lines = prepare_lines(train_set, alphabet, skipped);
    auto val_lines = prepare_lines(val_set, alphabet, skipped);
    if (train_lines.empty()) throw InvalidInput("train: no usable training lines");
    BlstmModel initial = blstm_init(kFeatureHeight, cfg.hidden_size, alphabet.num_classes(), cfg.seed);
    TrainResult result =
        train_from(std::move(initial), train_lines, val_lines, alphabet.blank_index(), cfg, on_epoch);
    skipped.insert(skipped.end(), result.skipped.begin(), result.skipped.end());
    result.skipped = std::move(skipped);
    return result;
}

std::string epoch_csv_header() { return "epoch,train_ctc_loss,val_error,wall_time_s"; }

std::string epoch_csv_row(const EpochReport &r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f,%.3f", r.epoch, r.train_ctc_loss, r.val_error,
                  r.wall_time);
    return buf;
}

void append_epoch_csv(const std::string &path, const EpochReport &r) {
    const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
    std::ofstream out(path, std::ios::app);
    if (!out) throw IoError("cannot write report " + path);
    if (fresh) out << epoch_csv_header() << '\n';
    out << epoch_csv_row(r) << '\n';
}

std::vector<ManifestEntry> read_manifest(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open manifest " + path);
    const fs::path base = fs::path(path).parent_path();
    auto resolve = [&](const std::string &p) {
        const fs::path fp(p);
        return (fp.is_absolute() ? fp : base / fp).string();
    };
    std::vector<ManifestEntry> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
            throw ManifestError(path + ":" + std::to_string(line_no) +
                                ": expected <image-path><TAB><truth-path>");
        }
        out.push_back({resolve(line.substr(0, tab)), resolve(line.substr(tab + 1))});
    }
    return out;
}

std::string read_truth_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open ground truth " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string s = ss.str();
    if (!s.empty() && s.back() == '\n') {
        s.pop_back();
        if (!s.empty() && s.back() == '\r') s.pop_back();
    }
    return s;
}

std::vector<LineRecord> load_manifest_records(const std::string &path) {
    std::vector<LineRecord> out;
    for (const ManifestEntry &e : read_manifest(path)) {
        LineRecord r;
        r.id = fs::path(e.image_path).stem().string();
        r.image = read_image(e.image_path);
        r.truth = read_truth_file(e.truth_path);
        out.push_back(std::move(r));
    }
    return out;
}

void write_manifest(const std::string &path, const std::vector<ManifestEntry> &entries) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write manifest " + path);
    for (const ManifestEntry &e : entries) out << e.image_path << '\t' << e.truth_path << '\n';
}

} // namespace bocr
