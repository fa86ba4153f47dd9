#include "specled/evaluate.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

namespace specled {

const Metric *EffectReport::find(const std::string &label) const {
    const auto it = std::find_if(metrics.begin(), metrics.end(),
                                 [&](const Metric &m) { return m.label == label; });
    return it == metrics.end() ? nullptr : &*it;
}

EffectReport evaluate(const SolveProblem &p, const SolveSolution &s) {
    check_weights(p.bank, s.alpha1);
    check_weights(p.bank, s.alpha2);
    const Spectrum w1 = synthesize(p.bank, s.alpha1);
    const Spectrum w2 = synthesize(p.bank, s.alpha2);
    const auto uv = [&](const Spectrum &w, const Reflectance *r) {
        return uv_prime(r ? tristimulus(w, *r, p.matcher) : tristimulus(w, p.matcher));
    };
    const Chromaticity r1w1 = uv(w1, &p.r1), r1w2 = uv(w2, &p.r1);
    const Chromaticity r2w1 = uv(w1, &p.r2), r2w2 = uv(w2, &p.r2);
    const double white_shift = uv_distance(uv(w1, nullptr), uv(w2, nullptr));

    EffectReport report;
    report.mode = p.mode;
    if (p.mode.is_isochromatic()) {
        report.metrics = {
            {"r1_vs_r2_under_w1", uv_distance(r1w1, r2w1), 1.9e-1},
            {"r1_vs_r2_under_w2", uv_distance(r1w2, r2w2), 9.8e-2},
            {"white_shift_w1_w2", white_shift, 8.1e-2},
        };
    } else {
        report.metrics = {
            {"r1_travel_w1_w2", uv_distance(r1w1, r1w2), 4.8e-2},
            {"r2_travel_w1_w2", uv_distance(r2w1, r2w2), 3.6e-3},
            {"white_shift_w1_w2", white_shift, 3.7e-2},
        };
    }
    return report;
}

std::string format_report_text(const EffectReport &report) {
    std::ostringstream out;
    out << "effect: " << to_string(report.mode.effect());
    if (const auto form = report.mode.constraint_form()) {
        out << " (" << to_string(*form) << ")";
    }
    out << "\n";
    char line[160];
    std::snprintf(line, sizeof line, "%-20s %14s  %s\n", "metric", "u'v' distance",
                  "published (other hardware)");
    out << line;
    for (const auto &m : report.metrics) {
        char ref[32] = "-";
        if (m.reference) {
            std::snprintf(ref, sizeof ref, "%.1e", *m.reference);
        }
        std::snprintf(line, sizeof line, "%-20s %14.6e  %s\n", m.label.c_str(), m.value, ref);
        out << line;
    }
    return out.str();
}

std::vector<SwatchRow> preview_swatches(const SolveProblem &p, const WeightVector &a1,
                                        const WeightVector &a2) {
    std::vector<SwatchRow> rows;
    for (const auto &[name, weights] : {std::pair{"w1", &a1}, std::pair{"w2", &a2}}) {
        const Spectrum w = synthesize(p.bank, *weights);
        const Tristimulus white = tristimulus(w, p.matcher);
        const double white_y = white.y();
        const auto row = [&](const char *material, const Tristimulus &t) {
            rows.push_back({material, name, preview_srgb(t, white_y), uv_prime(t)});
        };
        row("r1", tristimulus(w, p.r1, p.matcher));
        row("r2", tristimulus(w, p.r2, p.matcher));
        row("white", white);
    }
    return rows;
}

void write_ppm(std::ostream &out, const std::vector<SwatchRow> &rows, int cell) {
    std::vector<std::string> materials;
    std::vector<std::string> lights;
    std::map<std::pair<std::string, std::string>, const SwatchRow *> at;
    for (const auto &r : rows) {
        if (std::find(materials.begin(), materials.end(), r.material) == materials.end()) {
            materials.push_back(r.material);
        }
        if (std::find(lights.begin(), lights.end(), r.under) == lights.end()) {
            lights.push_back(r.under);
        }
        at[{r.under, r.material}] = &r;
    }
    const int width = cell * static_cast<int>(materials.size());
    const int height = cell * static_cast<int>(lights.size());
    out << "P6\n" << width << " " << height << "\n255\n";
    for (int y = 0; y < height; ++y) {
        const auto &light = lights[static_cast<std::size_t>(y / cell)];
        for (int x = 0; x < width; ++x) {
            const auto it = at.find({light, materials[static_cast<std::size_t>(x / cell)]});
            std::array<std::uint8_t, 3> px{};
            if (it != at.end()) {
                px = it->second->srgb.rgb;
            }
            out.write(reinterpret_cast<const char *>(px.data()), 3);
        }
    }
}

} // namespace specled
