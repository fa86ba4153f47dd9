#pragma once

// Post-hoc u'v' color-variation reports and swatch previews for a solved
// illuminant pair.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "specled/metamer.hpp"

namespace specled {

struct Metric {
    std::string label;
    double value = 0.0;
    /// Value measured for the same quantity on the original show hardware.
    /// Shown for orientation only; different LEDs and fabrics.
    std::optional<double> reference;
};

struct EffectReport {
    EffectMode mode = EffectMode::isochromatic();
    std::vector<Metric> metrics;

    const Metric *find(const std::string &label) const;
};

/// Isochromatic: r1 vs r2 under w1, r1 vs r2 under w2, white shift.
/// Specific color change: r1 travel, r2 travel, white shift.
EffectReport evaluate(const SolveProblem &p, const SolveSolution &s);

/// Aligned-column plain text.
std::string format_report_text(const EffectReport &report);

struct SwatchRow {
    std::string material; // "r1", "r2" or "white"
    std::string under;    // "w1" or "w2"
    SrgbPreview srgb;
    Chromaticity uv;
};

/// Six rows: {r1, r2, white} under w1, then under w2. Each illuminant's own
/// luminance is the white reference for its rows.
std::vector<SwatchRow> preview_swatches(const SolveProblem &p, const WeightVector &a1,
                                        const WeightVector &a2);

/// Binary P6 strip: one row of swatches per illuminant, one column per
/// material, each swatch `cell` x `cell` pixels.
void write_ppm(std::ostream &out, const std::vector<SwatchRow> &rows, int cell = 64);

} // namespace specled
