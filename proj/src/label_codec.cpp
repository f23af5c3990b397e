#include "bocr/label_codec.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "bocr/error.hpp"
#include "bocr/utf8.hpp"

namespace bocr {

namespace detail {
extern const std::string_view kDefaultAlphabetManifest;
extern const std::string_view kSyntheticAlphabetManifest;
} // namespace detail

UnsupportedSymbol::UnsupportedSymbol(char32_t codepoint, std::size_t offset)
    : Error("symbol " + utf8::format_codepoint(codepoint) + " at byte offset " +
            std::to_string(offset) + " is not in the alphabet"),
      codepoint_(codepoint), offset_(offset) {}

LabelAlphabet::LabelAlphabet(std::vector<char32_t> symbols, std::string name, int version,
                             bool relaxed)
    : symbols_(std::move(symbols)), name_(std::move(name)), version_(version) {
    if (symbols_.empty()) throw ManifestError("alphabet has no symbols");
    if (!relaxed && symbols_.size() != kPaperSymbolCount) {
        throw ManifestError("alphabet has " + std::to_string(symbols_.size()) + " symbols, expected " +
                            std::to_string(kPaperSymbolCount));
    }
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
        auto [it, fresh] = index_.emplace(symbols_[i], static_cast<int>(i));
        if (!fresh) {
            throw ManifestError("duplicate symbol " + utf8::format_codepoint(symbols_[i]) +
                                " at entries " + std::to_string(it->second) + " and " +
                                std::to_string(i));
        }
    }
}

int LabelAlphabet::index_of(char32_t cp) const {
    auto it = index_.find(cp);
    return it == index_.end() ? -1 : it->second;
}

char32_t LabelAlphabet::symbol(int index) const {
    if (index < 0 || static_cast<std::size_t>(index) >= symbols_.size()) {
        throw InvalidInput("label " + std::to_string(index) + " has no symbol (blank is " +
                           std::to_string(blank_index()) + ")");
    }
    return symbols_[index];
}

namespace {

std::string_view trim(std::string_view s) {
    auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && ws(s.front())) s.remove_prefix(1);
    while (!s.empty() && ws(s.back())) s.remove_suffix(1);
    return s;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
    }
    return true;
}

} // namespace

LabelAlphabet load_alphabet(std::string_view manifest, bool relaxed) {
    std::vector<char32_t> symbols;
    std::string name = "unnamed";
    int version = 1;
    std::size_t line_no = 0;
    while (!manifest.empty()) {
        ++line_no;
        const std::size_t nl = manifest.find('\n');
        std::string_view line = manifest.substr(0, nl);
        manifest.remove_prefix(nl == std::string_view::npos ? manifest.size() : nl + 1);

        std::string_view body = line;
        if (const auto hash = body.find('#'); hash != std::string_view::npos) {
            std::string_view comment = trim(body.substr(hash + 1));
            body = body.substr(0, hash);
            if (trim(body).empty()) {
                if (starts_with_ci(comment, "name:")) {
                    name = std::string(trim(comment.substr(5)));
                } else if (starts_with_ci(comment, "version:")) {
                    auto v = trim(comment.substr(8));
                    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), version);
                    if (ec != std::errc{} || p != v.data() + v.size()) {
                        throw ManifestError("line " + std::to_string(line_no) + ": bad version");
                    }
                }
            }
        }
        // A literal space entry cannot survive trimming; it must be U+0020.
        body = trim(body);
        if (body.empty()) continue;

        char32_t cp;
        if (starts_with_ci(body, "u+") && body.size() > 2) {
            unsigned value = 0;
            auto hex = body.substr(2);
            auto [p, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), value, 16);
            if (ec != std::errc{} || p != hex.data() + hex.size() || value > 0x10FFFF ||
                (value >= 0xD800 && value <= 0xDFFF)) {
                throw ManifestError("line " + std::to_string(line_no) + ": bad escape '" +
                                    std::string(body) + "'");
            }
            cp = value;
        } else {
            std::u32string decoded;
            try {
                decoded = utf8::decode(body);
            } catch (const InvalidInput &e) {
                throw ManifestError("line " + std::to_string(line_no) + ": " + e.what());
            }
            if (decoded.size() != 1) {
                throw ManifestError("line " + std::to_string(line_no) +
                                    ": entry must be exactly one character");
            }
            cp = decoded.front();
        }
        symbols.push_back(cp);
    }
    return LabelAlphabet(std::move(symbols), std::move(name), version, relaxed);
}

LabelAlphabet load_alphabet_file(const std::string &path, bool relaxed) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open alphabet manifest " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_alphabet(ss.str(), relaxed);
}

std::string save_alphabet(const LabelAlphabet &alphabet) {
    std::string out = "# name: " + alphabet.name() + "\n# version: " +
                      std::to_string(alphabet.version()) + "\n";
    for (char32_t cp : alphabet.symbols()) out += utf8::format_codepoint(cp) + "\n";
    return out;
}

std::string_view default_alphabet_manifest() { return detail::kDefaultAlphabetManifest; }
LabelAlphabet default_alphabet() { return load_alphabet(default_alphabet_manifest()); }

std::string_view synthetic_alphabet_manifest() { return detail::kSyntheticAlphabetManifest; }
LabelAlphabet synthetic_alphabet() { return load_alphabet(synthetic_alphabet_manifest(), true); }

LabelSeq encode_text(const LabelAlphabet &alphabet, std::string_view utf8_text) {
    LabelSeq out;
    for (const auto &[cp, offset] : utf8::decode_with_offsets(utf8_text)) {
        const int idx = alphabet.index_of(cp);
        if (idx < 0) throw UnsupportedSymbol(cp, offset);
        out.push_back(idx);
    }
    return out;
}

std::string decode_labels(const LabelAlphabet &alphabet, std::span<const int> labels) {
    std::string out;
    for (int l : labels) utf8::append(out, alphabet.symbol(l));
    return out;
}

} // namespace bocr
