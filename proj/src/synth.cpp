#include "bocr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "bocr/error.hpp"
#include "bocr/utf8.hpp"

namespace bocr {

namespace {

constexpr char32_t kSpace = U' ';
constexpr int kMaxGlyphAttempts = 200;

// Glyphs are 4 columns by 8 rows of 1 × 4 px cells, each inked with
// probability one half. Every column carries some ink so the glyph keeps its
// full width.
constexpr std::size_t kCellCols = 4, kCellRows = 8, kCellHeight = kGlyphHeight / kCellRows;
// Regeneration threshold, well above the guaranteed minimum.
constexpr double kTargetDifference = 0.25;

Glyph random_glyph(Rng &rng) {
    Glyph g;
    g.width = kCellCols;
    for (;;) {
        g.mask.assign(kGlyphHeight * g.width, 0);
        std::size_t inked_cols = 0;
        for (std::size_t c = 0; c < kCellCols; ++c) {
            bool any = false;
            for (std::size_t r = 0; r < kCellRows; ++r) {
                if (rng.uniform() >= 0.5) continue;
                any = true;
                for (std::size_t y = 0; y < kCellHeight; ++y) g.mask[(r * kCellHeight + y) * g.width + c] = 1;
            }
            inked_cols += any;
        }
        if (inked_cols == kCellCols) return g;
    }
}

} // namespace

const Glyph &GlyphAtlas::glyph(char32_t cp) const {
    auto it = glyphs.find(cp);
    if (it == glyphs.end()) throw UnsupportedSymbol(cp, 0);
    return it->second;
}

double glyph_difference(const Glyph &a, const Glyph &b) {
    const std::size_t w = std::max(a.width, b.width);
    if (w == 0) return 0.0;
    std::size_t diff = 0;
    for (std::size_t y = 0; y < kGlyphHeight; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const bool pa = x < a.width && a.ink(x, y);
            const bool pb = x < b.width && b.ink(x, y);
            diff += pa != pb;
        }
    }
    return static_cast<double>(diff) / static_cast<double>(w * kGlyphHeight);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t st = seed;
    std::uint64_t h = splitmix64(st);
    st = h ^ (a * 0x9e3779b97f4a7c15ULL);
    h = splitmix64(st);
    st = h ^ (b * 0xc2b2ae3d27d4eb4fULL);
    return splitmix64(st);
}

GlyphAtlas build_glyph_atlas(const LabelAlphabet &alphabet, std::uint64_t style_seed) {
    GlyphAtlas atlas;
    std::vector<const Glyph *> made;
    for (std::size_t i = 0; i < alphabet.symbol_count(); ++i) {
        const char32_t cp = alphabet.symbols()[i];
        if (cp == kSpace) {
            atlas.glyphs[cp] = Glyph{atlas.space_width,
                                     std::vector<std::uint8_t>(kGlyphHeight * atlas.space_width, 0)};
            continue;
        }
        Rng rng(derive_seed(style_seed, cp));
        bool placed = false;
        for (int attempt = 0; attempt < kMaxGlyphAttempts && !placed; ++attempt) {
            Glyph g = random_glyph(rng);
            const bool distinct = std::all_of(made.begin(), made.end(), [&](const Glyph *o) {
                return glyph_difference(g, *o) >= kTargetDifference;
            });
            if (distinct) {
                auto [it, _] = atlas.glyphs.emplace(cp, std::move(g));
                made.push_back(&it->second);
                placed = true;
            }
        }
        if (!placed) {
            throw GenerationError("could not make a distinguishable glyph for " +
                                  utf8::format_codepoint(cp));
        }
    }
    return atlas;
}

LineRecord render_line(const GlyphAtlas &atlas, const LabelAlphabet &alphabet, std::string_view text,
                       const Degradation &degrade, std::uint64_t seed, std::string id) {
    encode_text(alphabet, text); // rejects unsupported symbols
    const std::u32string cps = utf8::decode(text);
    Rng rng(seed);

    std::size_t width = 2 * atlas.margin_x;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        width += atlas.glyph(cps[i]).width + (i + 1 < cps.size() ? atlas.gap : 0);
    }
    width = std::max<std::size_t>(width, 1);
    const std::size_t height = kGlyphHeight + 2 * atlas.margin_y;
    GrayImage img(width, height, 255);

    const long jitter = static_cast<long>(std::min<std::size_t>(degrade.baseline_jitter, atlas.margin_y));
    std::size_t cursor = atlas.margin_x;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        const Glyph &g = atlas.glyph(cps[i]);
        long dy = 0;
        if (jitter > 0) dy = static_cast<long>(rng.below(2 * jitter + 1)) - jitter;
        const long top = static_cast<long>(atlas.margin_y) + dy;
        for (std::size_t y = 0; y < kGlyphHeight; ++y) {
            for (std::size_t x = 0; x < g.width; ++x) {
                if (g.ink(x, y)) img.at(cursor + x, static_cast<std::size_t>(top + static_cast<long>(y))) = 0;
            }
        }
        cursor += g.width + atlas.gap;
    }

    if (degrade.scale_jitter > 0.0) {
        const double s = rng.uniform(1.0 - degrade.scale_jitter, 1.0 + degrade.scale_jitter);
        const auto w = std::max<long>(1, std::lround(static_cast<double>(width) * s));
        const auto h = std::max<long>(1, std::lround(static_cast<double>(height) * s));
        img = resize_bilinear(img, static_cast<std::size_t>(w), static_cast<std::size_t>(h));
    }
    if (degrade.noise_sigma > 0.0) {
        for (auto &p : img.pixels()) {
            const double v = p + degrade.noise_sigma * rng.normal();
            p = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        }
    }
    return {std::move(id), std::move(img), std::string(text), degrade};
}

std::vector<std::string> generate_word_list(const LabelAlphabet &alphabet, std::size_t count,
                                            std::uint64_t seed) {
    std::vector<char32_t> letters;
    for (char32_t cp : alphabet.symbols()) {
        if (cp != kSpace) letters.push_back(cp);
    }
    if (letters.empty()) throw InvalidInput("alphabet has no letters to build words from");
    Rng rng(seed);
    std::vector<std::string> words;
    words.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t len = kMinWordLength + rng.below(kMaxWordLength - kMinWordLength + 1);
        std::string w;
        for (std::size_t k = 0; k < len; ++k) utf8::append(w, letters[rng.below(letters.size())]);
        words.push_back(std::move(w));
    }
    return words;
}

std::string random_line_text(const std::vector<std::string> &words, Rng &rng) {
    if (words.empty()) throw InvalidInput("word list is empty");
    const std::size_t n = 3 + rng.below(6);
    std::string line;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) line += ' ';
        line += words[rng.below(words.size())];
    }
    return line;
}

Corpus generate_corpus(const GlyphAtlas &atlas, const LabelAlphabet &alphabet,
                       const std::vector<std::string> &words, std::uint64_t seed,
                       CorpusCounts counts, const Degradation &degrade) {
    if (words.empty()) throw InvalidInput("generate_corpus: word list is empty");
    if (counts.train == 0 || counts.val == 0 || counts.test == 0) {
        throw InvalidInput("generate_corpus: every split needs at least one line");
    }
    Corpus corpus;
    auto fill = [&](std::vector<LineRecord> &out, std::size_t n, std::uint64_t split, const char *tag) {
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            Rng text_rng(derive_seed(seed, split, 2 * i));
            const std::string text = random_line_text(words, text_rng);
            char id[64];
            std::snprintf(id, sizeof id, "%s-%05zu", tag, i);
            out.push_back(render_line(atlas, alphabet, text, degrade, derive_seed(seed, split, 2 * i + 1), id));
        }
    };
    fill(corpus.train, counts.train, 1, "train");
    fill(corpus.val, counts.val, 2, "val");
    fill(corpus.test, counts.test, 3, "test");
    return corpus;
}

SyntheticPage compose_page(const GlyphAtlas &atlas, const LabelAlphabet &alphabet,
                           const std::vector<std::string> &words, std::size_t line_count,
                           const Degradation &degrade, std::uint64_t seed) {
    if (line_count == 0) throw InvalidInput("compose_page: need at least one line");
    Rng rng(seed);
    constexpr std::size_t pad = 20;
    constexpr std::size_t max_indent = 24;
    constexpr std::size_t max_extra_gap = 16;

    Degradation line_degrade;
    line_degrade.baseline_jitter = degrade.baseline_jitter;
    std::vector<LineRecord> lines;
    std::vector<std::size_t> indents, tops;
    std::size_t width = 0, y = pad;
    for (std::size_t i = 0; i < line_count; ++i) {
        const std::string text = random_line_text(words, rng);
        lines.push_back(render_line(atlas, alphabet, text, line_degrade, rng.next()));
        indents.push_back(rng.below(max_indent + 1));
        tops.push_back(y);
        width = std::max(width, indents.back() + lines.back().image.width());
        y += lines.back().image.height() + rng.below(max_extra_gap + 1);
    }
    SyntheticPage page{GrayImage(width + 2 * pad, y + pad, 255), {}, {}};
    for (std::size_t i = 0; i < line_count; ++i) {
        const GrayImage &src = lines[i].image;
        const std::size_t ox = pad + indents[i], oy = tops[i];
        LineBox box{page.image.height(), 0, page.image.width(), 0};
        for (std::size_t ly = 0; ly < src.height(); ++ly) {
            for (std::size_t lx = 0; lx < src.width(); ++lx) {
                const std::uint8_t p = src.at(lx, ly);
                page.image.at(ox + lx, oy + ly) = p;
                if (p < 128) {
                    box.top = std::min(box.top, oy + ly);
                    box.bottom = std::max(box.bottom, oy + ly + 1);
                    box.left = std::min(box.left, ox + lx);
                    box.right = std::max(box.right, ox + lx + 1);
                }
            }
        }
        page.lines.push_back(box);
        page.texts.push_back(lines[i].truth);
    }
    if (degrade.noise_sigma > 0.0) {
        for (auto &p : page.image.pixels()) {
            const double v = p + degrade.noise_sigma * rng.normal();
            p = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        }
    }
    return page;
}

} // namespace bocr
