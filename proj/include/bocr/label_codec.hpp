#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bocr/ctc.hpp"

namespace bocr {

inline constexpr std::size_t kPaperSymbolCount = 165;

// Ordered class table. Index of a symbol is its position; the CTC blank is
// the implicit last class (index == symbols().size()).
class LabelAlphabet {
  public:
    LabelAlphabet() = default;
    // Throws ManifestError on duplicates. Enforces 165 symbols unless
    // `relaxed` is set.
    LabelAlphabet(std::vector<char32_t> symbols, std::string name, int version,
                  bool relaxed = false);

    const std::vector<char32_t> &symbols() const { return symbols_; }
    std::size_t symbol_count() const { return symbols_.size(); }
    std::size_t num_classes() const { return symbols_.size() + 1; }
    int blank_index() const { return static_cast<int>(symbols_.size()); }
    const std::string &name() const { return name_; }
    int version() const { return version_; }

    // -1 when absent.
    int index_of(char32_t cp) const;
    bool contains(char32_t cp) const { return index_of(cp) >= 0; }
    char32_t symbol(int index) const;

    bool operator==(const LabelAlphabet &o) const {
        return symbols_ == o.symbols_ && name_ == o.name_ && version_ == o.version_;
    }

  private:
    std::vector<char32_t> symbols_;
    std::unordered_map<char32_t, int> index_;
    std::string name_;
    int version_ = 1;
};

// Manifest format: one entry per line, either the literal character or a
// `U+XXXX` escape; `#` starts a comment; blank lines are skipped. Comment
// lines of the form `# name: ...` and `# version: N` set metadata.
LabelAlphabet load_alphabet(std::string_view manifest, bool relaxed = false);
LabelAlphabet load_alphabet_file(const std::string &path, bool relaxed = false);
// Canonical manifest (every entry escaped as U+XXXX).
std::string save_alphabet(const LabelAlphabet &alphabet);

// Shipped 165-symbol Bengali + English reconstruction.
std::string_view default_alphabet_manifest();
LabelAlphabet default_alphabet();

// 20-symbol desk-scale alphabet (19 Bengali letters/signs + space), 21 classes.
std::string_view synthetic_alphabet_manifest();
LabelAlphabet synthetic_alphabet();

// One class per Unicode scalar, original order, no normalization.
LabelSeq encode_text(const LabelAlphabet &alphabet, std::string_view utf8_text);
std::string decode_labels(const LabelAlphabet &alphabet, std::span<const int> labels);

} // namespace bocr
