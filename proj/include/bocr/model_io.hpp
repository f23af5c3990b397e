#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bocr/blstm.hpp"
#include "bocr/label_codec.hpp"

namespace bocr {

// Model file layout, all integers little-endian:
//
//   offset  size  field
//   0       4     magic "BOCR"
//   4       4     format version (u32)
//   8       4     input size (u32)
//   12      4     hidden size (u32)
//   16      4     class count incl. blank (u32)
//   20      4     alphabet manifest byte length N (u32)
//   24      N     alphabet manifest, UTF-8 (canonical save_alphabet form)
//   24+N    4·P   parameters as binary32, BlstmModel::for_each_block order,
//                 each block row-major
//   end-4   4     CRC-32 (IEEE, zlib polynomial) of every preceding byte
inline constexpr char kModelMagic[4] = {'B', 'O', 'C', 'R'};
inline constexpr std::uint32_t kModelFormatVersion = 1;

struct LoadedModel {
    BlstmModel model;
    LabelAlphabet alphabet;
};

// Weights are rounded to the nearest binary32.
std::vector<std::uint8_t> encode_model(const BlstmModel &model, const LabelAlphabet &alphabet);
LoadedModel decode_model(std::span<const std::uint8_t> bytes);

void save_model(const BlstmModel &model, const LabelAlphabet &alphabet, const std::string &path);
LoadedModel load_model(const std::string &path);

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes);

} // namespace bocr
