#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bocr/blstm.hpp"
#include "bocr/label_codec.hpp"
#include "bocr/synth.hpp"

namespace bocr {

struct TrainConfig {
    double learning_rate = 1e-4;
    double momentum = 0.9;
    std::size_t max_epochs = 80;
    double loss_delta_stop = 0.01;
    double val_delta_stop = 0.1;
    std::size_t hidden_size = kDefaultHidden;
    std::uint64_t seed = 1;
    bool shuffle = true;
    std::optional<double> grad_clip; // global L2 norm

    // Throws InvalidInput when a field is out of range.
    void validate() const;
};

// Momentum accumulator; one entry per model parameter, same shapes.
using Velocity = BlstmModel;

// v <- mu*v + g;  theta <- theta - lr*v
void momentum_step(BlstmModel &model, Velocity &velocity, const BlstmModel &grads, double lr,
                   double mu);

struct EpochReport {
    std::size_t epoch = 0;        // 1-based
    double train_ctc_loss = 0.0;  // summed over training lines
    double val_error = 0.0;       // summed CTC loss over validation lines
    double wall_time = 0.0;       // seconds
};

// Both the training-loss and validation-error changes must be within their
// thresholds.
bool should_stop(const EpochReport &prev, const EpochReport &curr, const TrainConfig &cfg);

// A line ready for the network.
struct PreparedLine {
    std::string id;
    FeatureSequence features;
    LabelSeq target;
};

struct SkippedLine {
    std::string id;
    std::string reason;
};

// normalize -> features -> encode. Unencodable or CTC-infeasible lines are
// reported in `skipped` rather than thrown.
std::vector<PreparedLine> prepare_lines(const std::vector<LineRecord> &records,
                                        const LabelAlphabet &alphabet,
                                        std::vector<SkippedLine> &skipped);

struct TrainResult {
    BlstmModel model;                 // snapshot with the lowest validation error
    std::vector<EpochReport> reports;
    std::size_t best_epoch = 0;       // 1-based
    std::vector<SkippedLine> skipped;
};

using EpochCallback = std::function<void(const EpochReport &)>;

// Batch-size-one training from a fresh Xavier-initialised model.
TrainResult train(const std::vector<LineRecord> &train_set, const std::vector<LineRecord> &val_set,
                  const LabelAlphabet &alphabet, const TrainConfig &cfg,
                  const EpochCallback &on_epoch = {});

// Same loop starting from an explicit model (used by tests and resumption).
TrainResult train_from(BlstmModel initial, const std::vector<PreparedLine> &train_lines,
                       const std::vector<PreparedLine> &val_lines, int blank,
                       const TrainConfig &cfg, const EpochCallback &on_epoch = {});

// Sum of CTC losses; lines with a non-finite loss are ignored.
double summed_ctc_loss(const BlstmModel &model, const std::vector<PreparedLine> &lines, int blank);

// `epoch,train_ctc_loss,val_error,wall_time_s`
std::string epoch_csv_header();
std::string epoch_csv_row(const EpochReport &r);
void append_epoch_csv(const std::string &path, const EpochReport &r);

// Training manifest: `<image-path>\t<ground-truth-text-path>` per line.
// Relative paths resolve against the manifest's directory.
struct ManifestEntry {
    std::string image_path;
    std::string truth_path;
};
std::vector<ManifestEntry> read_manifest(const std::string &path);
std::vector<LineRecord> load_manifest_records(const std::string &path);
void write_manifest(const std::string &path, const std::vector<ManifestEntry> &entries);

// Ground-truth file contents with one trailing newline (LF or CRLF) removed.
std::string read_truth_file(const std::string &path);

} // namespace bocr
