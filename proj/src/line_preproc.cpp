#include "bocr/line_preproc.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "bocr/error.hpp"

namespace bocr {

std::uint8_t otsu_threshold(const GrayImage &image) {
    std::array<std::uint64_t, 256> hist{};
    for (std::uint8_t p : image.pixels()) ++hist[p];
    const double total = static_cast<double>(image.pixels().size());
    double sum_all = 0.0;
    for (int v = 0; v < 256; ++v) sum_all += v * static_cast<double>(hist[v]);

    double best_var = -1.0, w0 = 0.0, sum0 = 0.0;
    int best = 0;
    for (int t = 0; t < 256; ++t) {
        w0 += static_cast<double>(hist[t]);
        sum0 += t * static_cast<double>(hist[t]);
        const double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        const double m0 = sum0 / w0, m1 = (sum_all - sum0) / w1;
        const double var = w0 * w1 * (m0 - m1) * (m0 - m1);
        if (var > best_var) best_var = var, best = t;
    }
    return static_cast<std::uint8_t>(best);
}

namespace {

struct Band {
    std::size_t top, bottom; // [top, bottom)
};

class InkMap {
  public:
    InkMap(const GrayImage &page, std::uint8_t threshold)
        : width_(page.width()), height_(page.height()), ink_(page.pixels().size()) {
        for (std::size_t i = 0; i < ink_.size(); ++i) ink_[i] = page.pixels()[i] <= threshold;
    }

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    bool ink(std::size_t x, std::size_t y) const { return ink_[y * width_ + x] != 0; }

    std::size_t row_ink(std::size_t y, std::size_t x0, std::size_t x1) const {
        std::size_t n = 0;
        for (std::size_t x = x0; x < x1; ++x) n += ink_[y * width_ + x];
        return n;
    }

  private:
    std::size_t width_, height_;
    std::vector<std::uint8_t> ink_;
};

double median_height(const std::vector<Band> &bands) {
    std::vector<double> h;
    for (const Band &b : bands) h.push_back(static_cast<double>(b.bottom - b.top));
    std::sort(h.begin(), h.end());
    const std::size_t n = h.size();
    return n % 2 ? h[n / 2] : 0.5 * (h[n / 2 - 1] + h[n / 2]);
}

std::vector<Band> runs_where(const std::vector<bool> &flag) {
    std::vector<Band> out;
    std::size_t y = 0;
    while (y < flag.size()) {
        if (!flag[y]) {
            ++y;
            continue;
        }
        const std::size_t start = y;
        while (y < flag.size() && flag[y]) ++y;
        out.push_back({start, y});
    }
    return out;
}

std::vector<Band> phase_one(const InkMap &ink, const SegmentConfig &cfg) {
    const std::size_t strips = std::clamp<std::size_t>(cfg.strips, 1, ink.width());
    std::vector<std::size_t> votes(ink.height(), 0);
    for (std::size_t s = 0; s < strips; ++s) {
        const std::size_t x0 = s * ink.width() / strips;
        const std::size_t x1 = (s + 1) * ink.width() / strips;
        const double limit = cfg.valley_ink_fraction * static_cast<double>(x1 - x0);
        std::vector<bool> text(ink.height());
        for (std::size_t y = 0; y < ink.height(); ++y) {
            const std::size_t n = ink.row_ink(y, x0, x1);
            text[y] = n > 0 && static_cast<double>(n) >= limit;
        }
        for (const Band &b : runs_where(text)) {
            for (std::size_t y = b.top; y < b.bottom; ++y) ++votes[y];
        }
    }
    std::vector<bool> page_text(ink.height());
    const std::size_t need = std::max<std::size_t>(1, cfg.min_votes);
    for (std::size_t y = 0; y < ink.height(); ++y) page_text[y] = votes[y] >= need;
    return runs_where(page_text);
}

// Shrinks a band to the rows that actually carry ink. Returns false if none do.
bool tighten(const InkMap &ink, Band &b) {
    while (b.top < b.bottom && ink.row_ink(b.top, 0, ink.width()) == 0) ++b.top;
    while (b.bottom > b.top && ink.row_ink(b.bottom - 1, 0, ink.width()) == 0) --b.bottom;
    return b.top < b.bottom;
}

std::vector<Band> merge_fragments(const InkMap &, std::vector<Band> bands, const SegmentConfig &cfg) {
    bool changed = true;
    while (changed && bands.size() > 1) {
        changed = false;
        const double median = median_height(bands);
        for (std::size_t i = 0; i + 1 < bands.size(); ++i) {
            Band &a = bands[i];
            const Band &b = bands[i + 1];
            const double gap = static_cast<double>(b.top - a.bottom);
            const bool thin = static_cast<double>(a.bottom - a.top) < cfg.thin_height_fraction * median ||
                              static_cast<double>(b.bottom - b.top) < cfg.thin_height_fraction * median;
            if (thin && gap < cfg.merge_gap_fraction * median) {
                a.bottom = b.bottom;
                bands.erase(bands.begin() + static_cast<std::ptrdiff_t>(i) + 1);
                changed = true;
                break;
            }
        }
    }
    return bands;
}

std::vector<Band> split_touching(const InkMap &ink, std::vector<Band> bands, const SegmentConfig &cfg) {
    if (bands.empty()) return bands;
    const double median = median_height(bands);
    // Each split shortens a band, so this terminates; the cap only bounds pathological pages.
    for (std::size_t guard = 0; guard < 4 * ink.height(); ++guard) {
        bool split = false;
        for (std::size_t i = 0; i < bands.size(); ++i) {
            const Band b = bands[i];
            const double h = static_cast<double>(b.bottom - b.top);
            if (h <= cfg.split_height_fraction * median) continue;
            // Search the interior only, leaving at least half a median line on either side.
            const auto margin = static_cast<std::size_t>(std::max(1.0, std::floor(median / 2)));
            if (b.top + margin >= b.bottom - margin) continue;
            std::size_t cut = b.top + margin;
            std::size_t lowest = ink.row_ink(cut, 0, ink.width());
            for (std::size_t y = b.top + margin + 1; y < b.bottom - margin; ++y) {
                const std::size_t n = ink.row_ink(y, 0, ink.width());
                if (n < lowest) lowest = n, cut = y;
            }
            Band upper{b.top, cut}, lower{cut + (lowest == 0 ? 1 : 0), b.bottom};
            std::vector<Band> pieces;
            if (tighten(ink, upper)) pieces.push_back(upper);
            if (lower.top < lower.bottom && tighten(ink, lower)) pieces.push_back(lower);
            bands.erase(bands.begin() + static_cast<std::ptrdiff_t>(i));
            bands.insert(bands.begin() + static_cast<std::ptrdiff_t>(i), pieces.begin(), pieces.end());
            split = true;
            break;
        }
        if (!split) break;
    }
    return bands;
}

LineBox box_for(const InkMap &ink, const Band &b, std::size_t &ink_count) {
    std::size_t left = ink.width(), right = 0;
    ink_count = 0;
    for (std::size_t y = b.top; y < b.bottom; ++y) {
        for (std::size_t x = 0; x < ink.width(); ++x) {
            if (ink.ink(x, y)) {
                ++ink_count;
                left = std::min(left, x);
                right = std::max(right, x + 1);
            }
        }
    }
    if (ink_count == 0) left = 0, right = 0;
    return {b.top, b.bottom, left, right};
}

} // namespace

std::vector<LineBox> segment_lines(const GrayImage &page, const SegmentConfig &cfg) {
    if (page.empty()) throw InvalidInput("segment_lines: empty page");
    const auto [lo, hi] = std::minmax_element(page.pixels().begin(), page.pixels().end());
    if (*hi - *lo < 64) return {}; // no usable contrast: blank page

    const InkMap ink(page, otsu_threshold(page));
    std::vector<Band> bands;
    for (Band b : phase_one(ink, cfg)) {
        if (tighten(ink, b)) bands.push_back(b);
    }
    if (bands.empty()) return {};

    bands = merge_fragments(ink, std::move(bands), cfg);
    bands = split_touching(ink, std::move(bands), cfg);

    const double median = median_height(bands);
    std::vector<LineBox> out;
    for (const Band &b : bands) {
        std::size_t count = 0;
        const LineBox box = box_for(ink, b, count);
        if (count == 0) continue;
        const double h = static_cast<double>(b.bottom - b.top);
        const double density =
            static_cast<double>(count) / (h * static_cast<double>(box.right - box.left));
        if (h < cfg.min_height_fraction * median || density < cfg.min_ink_density) continue;
        out.push_back(box);
    }
    return out;
}

std::size_t normalized_width(const GrayImage &line) {
    const std::size_t h = line.height();
    return (line.width() * kFeatureHeight * 2 + h) / (2 * h);
}

GrayImage normalize_line(const GrayImage &line) {
    if (line.empty()) throw InvalidInput("normalize_line: empty image");
    if (line.height() == kFeatureHeight) return line;
    return resize_bilinear(line, std::max<std::size_t>(1, normalized_width(line)), kFeatureHeight);
}

FeatureSequence extract_features(const GrayImage &line) {
    if (line.height() != kFeatureHeight) {
        throw InvalidInput("extract_features: line height is " + std::to_string(line.height()) +
                           ", expected " + std::to_string(kFeatureHeight));
    }
    FeatureSequence frames(line.width(), Vector(kFeatureHeight));
    for (std::size_t x = 0; x < line.width(); ++x) {
        for (std::size_t y = 0; y < kFeatureHeight; ++y) {
            frames[x][y] = (255.0 - line.at(x, y)) / 255.0;
        }
    }
    return frames;
}

} // namespace bocr
