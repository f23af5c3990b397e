#include "bocr/pipeline.hpp"

#include "bocr/error.hpp"
#include "bocr/line_preproc.hpp"

namespace bocr {

std::string recognize_features(const BlstmModel &model, const LabelAlphabet &alphabet,
                               const FeatureSequence &features, std::size_t beam_width) {
    if (model.num_classes() != alphabet.num_classes()) {
        throw InvalidInput("model and alphabet disagree on the class count");
    }
    const auto fwd = blstm_forward(model, features);
    const LabelSeq labels = beam_decode(fwd.logits, alphabet.blank_index(), beam_width);
    return decode_labels(alphabet, labels);
}

std::string recognize_line(const BlstmModel &model, const LabelAlphabet &alphabet,
                           const GrayImage &line, std::size_t beam_width) {
    if (model.input_size() != kFeatureHeight) {
        throw InvalidInput("model expects " + std::to_string(model.input_size()) +
                           " features per frame, line images give " + std::to_string(kFeatureHeight));
    }
    if (line.empty() || normalized_width(line) < 1) {
        throw InvalidInput("line is narrower than one pixel after height normalization");
    }
    return recognize_features(model, alphabet, extract_features(normalize_line(line)), beam_width);
}

} // namespace bocr
