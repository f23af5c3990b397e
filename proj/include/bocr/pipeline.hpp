#pragma once

#include <cstddef>
#include <string>

#include "bocr/blstm.hpp"
#include "bocr/ctc.hpp"
#include "bocr/image.hpp"
#include "bocr/label_codec.hpp"

namespace bocr {

// normalize -> features -> BLSTM -> beam search -> UTF-8.
std::string recognize_line(const BlstmModel &model, const LabelAlphabet &alphabet,
                           const GrayImage &line, std::size_t beam_width = kDefaultBeamWidth);

// Same, from an already extracted feature sequence.
std::string recognize_features(const BlstmModel &model, const LabelAlphabet &alphabet,
                               const FeatureSequence &features,
                               std::size_t beam_width = kDefaultBeamWidth);

} // namespace bocr
