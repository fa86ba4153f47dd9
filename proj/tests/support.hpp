#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "specled/io.hpp"

namespace specled::testing {

inline std::filesystem::path fixtures() { return io::fixtures_dir(); }

inline std::filesystem::path golden_dir() { return std::filesystem::path(SPECLED_TEST_DIR) / "golden"; }

inline const ColorMatcher &cie1931() {
    static const ColorMatcher m = io::load_matcher_csv(io::default_matcher_path());
    return m;
}

inline SolveProblem fixture_problem(const std::string &name) { return io::load_problem(fixtures() / name); }

inline bool close_rel(double a, double b, double rel, double abs_floor = 1e-300) {
    return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), abs_floor});
}

/// Floor plus Gaussian bumps, built with plain loops.
struct Bump {
    double peak_nm;
    double fwhm_nm;
    double amplitude;
};

inline Reflectance bumps(const SpectralGrid &g, double floor, const std::vector<Bump> &list) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(g.count()));
    for (std::size_t i = 0; i < g.count(); ++i) {
        double x = floor;
        for (const auto &b : list) {
            const double sigma = b.fwhm_nm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
            const double d = g.wavelength(i) - b.peak_nm;
            x += b.amplitude * std::exp(-0.5 * d * d / (sigma * sigma));
        }
        v[static_cast<Eigen::Index>(i)] = std::min(x, 1.0);
    }
    return Reflectance(g, v);
}

inline Reflectance random_reflectance(std::mt19937_64 &rng, const SpectralGrid &g) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int count = 1 + static_cast<int>(u(rng) * 2.0);
    std::vector<Bump> list;
    for (int k = 0; k < count; ++k) {
        list.push_back({400.0 + 300.0 * u(rng), 30.0 + 100.0 * u(rng), 0.2 + 0.6 * u(rng)});
    }
    return bumps(g, 0.02 + 0.15 * u(rng), list);
}

inline Spectrum random_spectrum(std::mt19937_64 &rng, const SpectralGrid &g, double scale = 1.0) {
    std::uniform_real_distribution<double> u(0.0, scale);
    Eigen::VectorXd v(static_cast<Eigen::Index>(g.count()));
    for (auto &x : v) {
        x = u(rng);
    }
    return Spectrum(g, v);
}

/// Plain-loop colorimetry, independent of the library's Eigen expressions.
inline std::array<double, 3> loop_xyz(const SolveProblem &p, const Reflectance &r, const WeightVector &a) {
    const auto &g = p.bank.grid();
    std::array<double, 3> xyz{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < g.count(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        double w = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            w += a[k] * p.bank.basis()(row, static_cast<Eigen::Index>(k));
        }
        for (int c = 0; c < 3; ++c) {
            xyz[static_cast<std::size_t>(c)] += p.matcher.rows()(c, row) * r[i] * w * g.step_nm();
        }
    }
    return xyz;
}

inline std::array<double, 2> loop_uv(const SolveProblem &p, const Reflectance &r, const WeightVector &a) {
    const auto xyz = loop_xyz(p, r, a);
    const double d = xyz[0] + 15.0 * xyz[1] + 3.0 * xyz[2];
    return {4.0 * xyz[0] / d, 9.0 * xyz[1] / d};
}

inline double loop_dist(const std::array<double, 2> &a, const std::array<double, 2> &b) {
    return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]));
}

} // namespace specled::testing
