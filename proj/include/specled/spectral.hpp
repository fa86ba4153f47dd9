#pragma once

// Sampled spectra and the colorimetric transforms on them. Every type here
// is an immutable value; every operation is a pure function.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>

#include <Eigen/Core>

#include "specled/error.hpp"

namespace specled {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix3X = Eigen::Matrix<Scalar, 3, Eigen::Dynamic>;

// Uniform wavelength sampling: start_nm + i * step_nm for i in [0, count).
class SpectralGrid {
public:
    SpectralGrid() = default;

    SpectralGrid(double start_nm, double step_nm, std::size_t count)
        : start_nm_(start_nm), step_nm_(step_nm), count_(count) {
        if (!std::isfinite(start_nm) || !std::isfinite(step_nm) || !(start_nm > 0.0) ||
            !(step_nm > 0.0) || count < 2) {
            std::ostringstream msg;
            msg << "invalid spectral grid (start " << start_nm << " nm, step " << step_nm
                << " nm, count " << count << ")";
            throw Error(ErrorCode::InvalidArgument, msg.str());
        }
    }

    /// 380 nm to 780 nm in 5 nm steps.
    static SpectralGrid visible() { return SpectralGrid(380.0, 5.0, 81); }

    double start_nm() const { return start_nm_; }
    double step_nm() const { return step_nm_; }
    std::size_t count() const { return count_; }
    double end_nm() const { return wavelength(count_ - 1); }
    double wavelength(std::size_t i) const { return start_nm_ + static_cast<double>(i) * step_nm_; }

    // Grids read back from text may differ in the last ulp; compare with a
    // tolerance relative to the step.
    bool matches(const SpectralGrid &other) const {
        const double tol = 1e-9 * step_nm_;
        return count_ == other.count_ && std::abs(start_nm_ - other.start_nm_) <= tol &&
               std::abs(step_nm_ - other.step_nm_) <= tol;
    }

    bool operator==(const SpectralGrid &other) const = default;

private:
    double start_nm_ = 380.0;
    double step_nm_ = 5.0;
    std::size_t count_ = 81;
};

inline std::string describe(const SpectralGrid &g) {
    std::ostringstream s;
    s << g.start_nm() << "-" << g.end_nm() << " nm @ " << g.step_nm() << " nm (" << g.count()
      << " samples)";
    return s.str();
}

inline void require_same_grid(const SpectralGrid &a, const SpectralGrid &b, const char *what) {
    if (!a.matches(b)) {
        throw Error(ErrorCode::GridMismatch,
                    std::string(what) + ": grid " + describe(a) + " vs " + describe(b));
    }
}

namespace detail {

// Value policies for the two kinds of sampled curve.
struct PowerKind {
    static constexpr const char *name = "spectrum";
    static constexpr double upper = HUGE_VAL;
};

struct ReflectanceKind {
    static constexpr const char *name = "reflectance";
    static constexpr double upper = 1.0;
};

} // namespace detail

/// A function of wavelength sampled on a SpectralGrid. `Kind` fixes the
/// admissible value range: [0, inf) for power spectra, [0, 1] for
/// reflectances.
template <typename Scalar, typename Kind>
class Sampled {
public:
    using Values = VectorX<Scalar>;

    Sampled(SpectralGrid grid, Values values) : grid_(grid), values_(std::move(values)) {
        if (static_cast<std::size_t>(values_.size()) != grid_.count()) {
            std::ostringstream msg;
            msg << Kind::name << " has " << values_.size() << " samples, grid expects "
                << grid_.count();
            throw Error(ErrorCode::LengthMismatch, msg.str());
        }
        for (Eigen::Index i = 0; i < values_.size(); ++i) {
            const double v = static_cast<double>(values_[i]);
            if (!std::isfinite(v)) {
                throw Error(ErrorCode::NonFinite, std::string(Kind::name) + " sample at " +
                                                      std::to_string(grid_.wavelength(i)) +
                                                      " nm is not finite");
            }
            if (v < 0.0 || v > Kind::upper) {
                std::ostringstream msg;
                msg << Kind::name << " sample " << v << " at " << grid_.wavelength(i)
                    << " nm is outside [0, " << Kind::upper << "]";
                throw Error(ErrorCode::RangeError, msg.str());
            }
        }
    }

    static Sampled constant(const SpectralGrid &grid, Scalar value) {
        return Sampled(grid, Values::Constant(static_cast<Eigen::Index>(grid.count()), value));
    }

    const SpectralGrid &grid() const { return grid_; }
    const Values &values() const { return values_; }
    Scalar operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
    std::size_t size() const { return grid_.count(); }

private:
    SpectralGrid grid_;
    Values values_;
};

template <typename Scalar>
using BasicSpectrum = Sampled<Scalar, detail::PowerKind>;
template <typename Scalar>
using BasicReflectance = Sampled<Scalar, detail::ReflectanceKind>;

using Spectrum = BasicSpectrum<double>;
using Reflectance = BasicReflectance<double>;

/// Sampled color matching functions as a 3 x M matrix (rows x̄, ȳ, z̄) with
/// the rectangle-rule weight Δλ folded in at evaluation time.
template <typename Scalar>
class BasicColorMatcher {
public:
    BasicColorMatcher(SpectralGrid grid, Matrix3X<Scalar> rows) : grid_(grid), rows_(std::move(rows)) {
        if (static_cast<std::size_t>(rows_.cols()) != grid_.count()) {
            throw Error(ErrorCode::LengthMismatch, "color matcher rows do not match grid length");
        }
        if (!rows_.allFinite()) {
            throw Error(ErrorCode::NonFinite, "color matcher contains non-finite entries");
        }
        if ((rows_.array() < Scalar(0)).any()) {
            throw Error(ErrorCode::RangeError, "color matcher contains negative entries");
        }
    }

    const SpectralGrid &grid() const { return grid_; }
    const Matrix3X<Scalar> &rows() const { return rows_; }
    auto cx() const { return rows_.row(0); }
    auto cy() const { return rows_.row(1); }
    auto cz() const { return rows_.row(2); }
    Scalar quadrature_scale() const { return static_cast<Scalar>(grid_.step_nm()); }

    /// Wavelength of the ȳ maximum.
    double luminance_peak_nm() const {
        Eigen::Index at = 0;
        rows_.row(1).maxCoeff(&at);
        return grid_.wavelength(static_cast<std::size_t>(at));
    }

private:
    SpectralGrid grid_;
    Matrix3X<Scalar> rows_;
};

using ColorMatcher = BasicColorMatcher<double>;

template <typename Scalar>
struct BasicTristimulus {
    Eigen::Matrix<Scalar, 3, 1> xyz = Eigen::Matrix<Scalar, 3, 1>::Zero();

    Scalar x() const { return xyz[0]; }
    Scalar y() const { return xyz[1]; }
    Scalar z() const { return xyz[2]; }
};

using Tristimulus = BasicTristimulus<double>;

inline Tristimulus make_tristimulus(double x, double y, double z) {
    return Tristimulus{Eigen::Vector3d(x, y, z)};
}

/// CIE 1976 u'v' plus the luminance Y it was computed from.
template <typename Scalar>
struct BasicChromaticity {
    Scalar u_prime = 0;
    Scalar v_prime = 0;
    Scalar luminance_y = 0;
};

using Chromaticity = BasicChromaticity<double>;

// v = C R w, with R = I.
template <typename Scalar>
BasicTristimulus<Scalar> tristimulus(const BasicSpectrum<Scalar> &w,
                                     const BasicColorMatcher<Scalar> &c) {
    require_same_grid(w.grid(), c.grid(), "tristimulus");
    return {c.quadrature_scale() * (c.rows() * w.values())};
}

// v = C R w.
template <typename Scalar>
BasicTristimulus<Scalar> tristimulus(const BasicSpectrum<Scalar> &w,
                                     const BasicReflectance<Scalar> &r,
                                     const BasicColorMatcher<Scalar> &c) {
    require_same_grid(w.grid(), c.grid(), "tristimulus");
    require_same_grid(r.grid(), c.grid(), "tristimulus");
    const VectorX<Scalar> lit = r.values().cwiseProduct(w.values());
    return {c.quadrature_scale() * (c.rows() * lit)};
}

template <typename Scalar>
BasicChromaticity<Scalar> uv_prime(const BasicTristimulus<Scalar> &t) {
    if (!t.xyz.allFinite()) {
        throw Error(ErrorCode::NonFinite, "tristimulus value is not finite");
    }
    const Scalar denom = t.x() + Scalar(15) * t.y() + Scalar(3) * t.z();
    const Scalar scale = t.xyz.cwiseAbs().sum();
    if (!(denom > Scalar(0)) || !(denom > Scalar(1e-12) * scale)) {
        throw Error(ErrorCode::DegenerateColor, "chromaticity undefined for (near) zero stimulus");
    }
    return {Scalar(4) * t.x() / denom, Scalar(9) * t.y() / denom, t.y()};
}

template <typename Scalar>
Scalar uv_distance(const BasicChromaticity<Scalar> &a, const BasicChromaticity<Scalar> &b) {
    return std::hypot(a.u_prime - b.u_prime, a.v_prime - b.v_prime);
}

struct SrgbPreview {
    std::array<std::uint8_t, 3> rgb{};
    bool clipped = false;
};

/// Relative sRGB rendering of `t` against a reference luminance: no
/// chromatic adaptation, channels clamped, IEC 61966-2-1 transfer curve.
template <typename Scalar>
SrgbPreview preview_srgb(const BasicTristimulus<Scalar> &t, Scalar white_y) {
    if (!(white_y > Scalar(0))) {
        throw Error(ErrorCode::InvalidArgument, "preview reference luminance must be positive");
    }
    Eigen::Matrix3d to_linear;
    to_linear << 3.2406, -1.5372, -0.4986,
                -0.9689,  1.8758,  0.0415,
                 0.0557, -0.2040,  1.0570;
    const Eigen::Vector3d linear = to_linear * (t.xyz.template cast<double>() / static_cast<double>(white_y));

    SrgbPreview out;
    constexpr double clip_slack = 1e-4;
    for (int i = 0; i < 3; ++i) {
        double c = linear[i];
        if (!std::isfinite(c)) {
            c = 0.0;
            out.clipped = true;
        }
        if (c < -clip_slack || c > 1.0 + clip_slack) {
            out.clipped = true;
        }
        c = std::clamp(c, 0.0, 1.0);
        const double encoded = c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
        out.rgb[static_cast<std::size_t>(i)] =
            static_cast<std::uint8_t>(std::floor(std::clamp(encoded, 0.0, 1.0) * 255.0 + 0.5));
    }
    return out;
}

/// Linear interpolation onto `target`; outside the source range the nearest
/// endpoint value is held. Reflectances stay within [0, 1].
template <typename Scalar, typename Kind>
Sampled<Scalar, Kind> resample(const Sampled<Scalar, Kind> &s, const SpectralGrid &target) {
    const SpectralGrid &src = s.grid();
    if (src.matches(target)) {
        return Sampled<Scalar, Kind>(target, s.values());
    }
    if (target.end_nm() < src.start_nm() || target.start_nm() > src.end_nm()) {
        throw Error(ErrorCode::EmptyOverlap,
                    "cannot resample " + describe(src) + " onto disjoint " + describe(target));
    }
    const auto &v = s.values();
    const auto last = static_cast<Eigen::Index>(src.count() - 1);
    VectorX<Scalar> out(static_cast<Eigen::Index>(target.count()));
    for (std::size_t i = 0; i < target.count(); ++i) {
        const double pos = (target.wavelength(i) - src.start_nm()) / src.step_nm();
        Scalar value;
        if (pos <= 0.0) {
            value = v[0];
        } else if (pos >= static_cast<double>(last)) {
            value = v[last];
        } else {
            const auto lo = static_cast<Eigen::Index>(std::floor(pos));
            const Scalar frac = static_cast<Scalar>(pos - static_cast<double>(lo));
            value = frac == Scalar(0) ? v[lo] : (Scalar(1) - frac) * v[lo] + frac * v[lo + 1];
        }
        out[static_cast<Eigen::Index>(i)] = std::clamp(value, Scalar(0), static_cast<Scalar>(Kind::upper));
    }
    return Sampled<Scalar, Kind>(target, std::move(out));
}

template <typename Scalar>
BasicColorMatcher<Scalar> resample(const BasicColorMatcher<Scalar> &c, const SpectralGrid &target) {
    if (c.grid().matches(target)) {
        return BasicColorMatcher<Scalar>(target, c.rows());
    }
    Matrix3X<Scalar> rows(3, static_cast<Eigen::Index>(target.count()));
    for (int r = 0; r < 3; ++r) {
        const BasicSpectrum<Scalar> row(c.grid(), c.rows().row(r).transpose());
        rows.row(r) = resample(row, target).values().transpose();
    }
    return BasicColorMatcher<Scalar>(target, std::move(rows));
}

} // namespace specled
