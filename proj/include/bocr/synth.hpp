#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bocr/image.hpp"
#include "bocr/label_codec.hpp"
#include "bocr/line_preproc.hpp"

namespace bocr {

inline constexpr std::size_t kGlyphHeight = 32;

struct Glyph {
    std::size_t width = 0;
    std::vector<std::uint8_t> mask; // kGlyphHeight × width, 1 = ink
    bool ink(std::size_t x, std::size_t y) const { return mask[y * width + x] != 0; }
};

// Procedural per-codepoint glyphs. Space maps to an ink-free gap.
struct GlyphAtlas {
    std::map<char32_t, Glyph> glyphs;
    std::size_t gap = 2;          // columns between neighbouring glyphs
    std::size_t space_width = 8;  // width of U+0020
    std::size_t margin_x = 6;     // left/right page margin of a rendered line
    std::size_t margin_y = 8;     // top/bottom margin; 8 + 32 + 8 = 48 rows

    const Glyph &glyph(char32_t cp) const;
};

// Fraction of differing pixels between two masks, the narrower one padded
// with background to the wider width.
double glyph_difference(const Glyph &a, const Glyph &b);

inline constexpr double kMinGlyphDifference = 0.10;

GlyphAtlas build_glyph_atlas(const LabelAlphabet &alphabet, std::uint64_t style_seed);

struct Degradation {
    double noise_sigma = 0.0;     // Gaussian intensity noise, grey levels (<= 20)
    double scale_jitter = 0.0;    // uniform scale in [1 - j, 1 + j] (<= 0.25)
    std::size_t baseline_jitter = 0; // per-glyph vertical offset in [-j, j] px (<= 2)

    bool clean() const { return noise_sigma == 0.0 && scale_jitter == 0.0 && baseline_jitter == 0; }
    static Degradation none() { return {}; }
    static Degradation mild() { return {10.0, 0.0, 0}; }
};

struct LineRecord {
    std::string id;
    GrayImage image;
    std::string truth; // UTF-8
    Degradation degradation;
};

LineRecord render_line(const GlyphAtlas &atlas, const LabelAlphabet &alphabet, std::string_view text,
                       const Degradation &degrade, std::uint64_t seed, std::string id = "line");

struct SyntheticPage {
    GrayImage image;
    std::vector<LineBox> lines; // ink bounding boxes, top to bottom
    std::vector<std::string> texts;
};

inline constexpr std::size_t kMinWordLength = 8;
inline constexpr std::size_t kMaxWordLength = 14;

// Pseudo-words of kMinWordLength..kMaxWordLength letters over the alphabet's
// non-space symbols.
std::vector<std::string> generate_word_list(const LabelAlphabet &alphabet, std::size_t count,
                                            std::uint64_t seed);

// 3..8 words joined by single spaces.
std::string random_line_text(const std::vector<std::string> &words, Rng &rng);

struct CorpusCounts {
    std::size_t train = 0, val = 0, test = 0;
};

struct Corpus {
    std::vector<LineRecord> train, val, test;
};

Corpus generate_corpus(const GlyphAtlas &atlas, const LabelAlphabet &alphabet,
                       const std::vector<std::string> &words, std::uint64_t seed,
                       CorpusCounts counts, const Degradation &degrade);

// Stacks `line_count` rendered lines with whitespace between them. Noise is
// applied to the composed page; geometry is recorded before degradation.
SyntheticPage compose_page(const GlyphAtlas &atlas, const LabelAlphabet &alphabet,
                           const std::vector<std::string> &words, std::size_t line_count,
                           const Degradation &degrade, std::uint64_t seed);

// Derives an independent stream seed from a base seed and stream ids.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

} // namespace bocr
