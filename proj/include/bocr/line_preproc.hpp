#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "bocr/blstm.hpp"
#include "bocr/image.hpp"

namespace bocr {

// Half-open pixel rectangle [left, right) × [top, bottom) on the page.
struct LineBox {
    std::size_t top = 0;
    std::size_t bottom = 0;
    std::size_t left = 0;
    std::size_t right = 0;

    std::size_t height() const { return bottom - top; }
    std::size_t width() const { return right - left; }
    bool operator==(const LineBox &) const = default;
};

// Thresholds for the two-phase projection-profile segmenter. Fractions are
// relative to the quantity named in each field.
struct SegmentConfig {
    std::size_t strips = 4;                 // vertical strips in phase one
    double valley_ink_fraction = 0.02;      // row is a valley when ink < this × strip width
    std::size_t min_votes = 1;              // strips that must mark a row as text
    double min_height_fraction = 0.25;      // drop bands shorter than this × median
    double min_ink_density = 0.005;         // drop bands whose box is emptier than this
    double split_height_fraction = 1.8;     // split bands taller than this × median
    double merge_gap_fraction = 0.15;       // merge a thin band across gaps below this × median
    double thin_height_fraction = 0.5;      // "thin" = shorter than this × median
};

// Global Otsu threshold; pixels <= threshold count as ink.
std::uint8_t otsu_threshold(const GrayImage &image);

// Phase one: strip-wise horizontal projection valleys stitched into
// page-wide bands. Phase two: over-split merge, touching-line split and
// artifact rejection. Boxes come back top to bottom; a blank page yields none.
std::vector<LineBox> segment_lines(const GrayImage &page, const SegmentConfig &config = {});

// Width the line would have after scaling to 48 rows, before clamping to 1.
std::size_t normalized_width(const GrayImage &line);

// Bilinear rescale to exactly 48 rows with the aspect ratio preserved.
GrayImage normalize_line(const GrayImage &line);

// One 48-value frame per column, (255 - intensity) / 255 so ink reads high.
FeatureSequence extract_features(const GrayImage &line);

} // namespace bocr
