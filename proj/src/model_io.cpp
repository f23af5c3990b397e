#include "bocr/model_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "bocr/error.hpp"

namespace bocr {

namespace {

constexpr std::size_t kHeaderSize = 24;

void put_u32(std::vector<std::uint8_t> &out, std::uint32_t v) {
    for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(b[at + k]) << (8 * k);
    return v;
}

std::uint32_t checked_u32(std::size_t v, const char *what) {
    if (v > 0xFFFFFFFFu) throw InvalidInput(std::string("model ") + what + " does not fit in 32 bits");
    return static_cast<std::uint32_t>(v);
}

} // namespace

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed in chunks to stay within range.
    std::size_t pos = 0;
    while (pos < bytes.size()) {
        const std::size_t n = std::min<std::size_t>(bytes.size() - pos, 1u << 30);
        crc = crc32(crc, bytes.data() + pos, static_cast<uInt>(n));
        pos += n;
    }
    return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> encode_model(const BlstmModel &model, const LabelAlphabet &alphabet) {
    if (model.num_classes() != alphabet.num_classes()) {
        throw InvalidInput("model has " + std::to_string(model.num_classes()) +
                           " classes but the alphabet defines " +
                           std::to_string(alphabet.num_classes()));
    }
    const std::string manifest = save_alphabet(alphabet);
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderSize + manifest.size() + 4 * model.parameter_count() + 4);
    out.insert(out.end(), std::begin(kModelMagic), std::end(kModelMagic));
    put_u32(out, kModelFormatVersion);
    put_u32(out, checked_u32(model.input_size(), "input size"));
    put_u32(out, checked_u32(model.hidden_size(), "hidden size"));
    put_u32(out, checked_u32(model.num_classes(), "class count"));
    put_u32(out, checked_u32(manifest.size(), "alphabet"));
    out.insert(out.end(), manifest.begin(), manifest.end());
    model.for_each_block([&](std::span<const double> block) {
        for (double v : block) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    });
    put_u32(out, crc32_of(out));
    return out;
}

LoadedModel decode_model(std::span<const std::uint8_t> bytes) {
    if (bytes.empty()) throw CorruptionError("model file is empty");
    if (std::memcmp(bytes.data(), kModelMagic, std::min<std::size_t>(bytes.size(), 4)) != 0) {
        throw FormatError("not a model file (bad magic)");
    }
    if (bytes.size() < 8) throw CorruptionError("model file is truncated");
    const std::uint32_t version = get_u32(bytes, 4);
    if (version < 1 || version > kModelFormatVersion) {
        throw VersionError("model format version " + std::to_string(version) +
                           " is not supported (supported: 1.." +
                           std::to_string(kModelFormatVersion) + ")");
    }
    if (bytes.size() < kHeaderSize + 4) throw CorruptionError("model file is truncated");
    const std::size_t body = bytes.size() - 4;
    if (crc32_of(bytes.first(body)) != get_u32(bytes, body)) {
        throw CorruptionError("model file checksum mismatch (truncated or corrupted)");
    }

    const std::size_t input = get_u32(bytes, 8), hidden = get_u32(bytes, 12),
                      classes = get_u32(bytes, 16), manifest_len = get_u32(bytes, 20);
    if (input == 0 || hidden == 0 || classes == 0) throw CorruptionError("model has a zero dimension");
    if (manifest_len > body - kHeaderSize) throw CorruptionError("alphabet overruns the file");

    LoadedModel out;
    const std::string manifest(reinterpret_cast<const char *>(bytes.data() + kHeaderSize), manifest_len);
    try {
        out.alphabet = load_alphabet(manifest, /*relaxed=*/true);
    } catch (const ManifestError &e) {
        throw CorruptionError(std::string("embedded alphabet is invalid: ") + e.what());
    }
    if (out.alphabet.num_classes() != classes) {
        throw CorruptionError("embedded alphabet defines " + std::to_string(out.alphabet.num_classes()) +
                              " classes, header says " + std::to_string(classes));
    }

    out.model = BlstmModel(input, hidden, classes);
    const std::size_t expected = 4 * out.model.parameter_count();
    if (body - kHeaderSize - manifest_len != expected) {
        throw CorruptionError("parameter payload is " +
                              std::to_string(body - kHeaderSize - manifest_len) + " bytes, expected " +
                              std::to_string(expected));
    }
    std::size_t at = kHeaderSize + manifest_len;
    out.model.for_each_block([&](std::span<double> block) {
        for (double &v : block) {
            v = static_cast<double>(std::bit_cast<float>(get_u32(bytes, at)));
            at += 4;
        }
    });
    return out;
}

void save_model(const BlstmModel &model, const LabelAlphabet &alphabet, const std::string &path) {
    const auto bytes = encode_model(model, alphabet);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write model " + path);
    out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + path);
}

LoadedModel load_model(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model " + path);
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                          std::istreambuf_iterator<char>()};
    return decode_model(bytes);
}

} // namespace bocr
