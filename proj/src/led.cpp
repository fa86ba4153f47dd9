#include "specled/led.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "specled/sequence.hpp"

namespace specled {

LedBank::LedBank(std::string name, SpectralGrid grid, Eigen::MatrixXd basis,
                 std::vector<std::string> channel_labels, double max_weight)
    : name_(std::move(name)), grid_(grid), basis_(std::move(basis)),
      labels_(std::move(channel_labels)), max_weight_(max_weight) {
    if (static_cast<std::size_t>(basis_.rows()) != grid_.count()) {
        throw Error(ErrorCode::LengthMismatch, "bank basis rows do not match grid length");
    }
    if (basis_.cols() < 2) {
        throw Error(ErrorCode::InvalidArgument, "an LED bank needs at least two channels");
    }
    if (labels_.size() != channels()) {
        throw Error(ErrorCode::LengthMismatch, "bank has " + std::to_string(labels_.size()) +
                                                   " labels for " + std::to_string(channels()) +
                                                   " channels");
    }
    if (!std::isfinite(max_weight_) || !(max_weight_ > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "bank max_weight must be positive and finite");
    }
    if (!basis_.allFinite()) {
        throw Error(ErrorCode::NonFinite, "bank basis contains non-finite values");
    }
    for (Eigen::Index k = 0; k < basis_.cols(); ++k) {
        if ((basis_.col(k).array() < 0.0).any()) {
            throw Error(ErrorCode::RangeError, "bank channel '" + labels_[k] + "' has negative samples");
        }
        if (!(basis_.col(k).maxCoeff() > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "bank channel '" + labels_[k] + "' is identically zero");
        }
    }
}

Spectrum LedBank::channel(std::size_t k) const {
    return Spectrum(grid_, basis_.col(static_cast<Eigen::Index>(k)));
}

LedBank LedBank::subset(std::span<const std::size_t> channels) const {
    Eigen::MatrixXd basis(basis_.rows(), static_cast<Eigen::Index>(channels.size()));
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < channels.size(); ++i) {
        if (channels[i] >= this->channels()) {
            throw Error(ErrorCode::InvalidArgument, "channel index out of range");
        }
        basis.col(static_cast<Eigen::Index>(i)) = basis_.col(static_cast<Eigen::Index>(channels[i]));
        labels.push_back(labels_[channels[i]]);
    }
    return LedBank(name_ + "/subset", grid_, std::move(basis), std::move(labels), max_weight_);
}

void check_weights(const LedBank &bank, const WeightVector &a) {
    if (a.size() != bank.channels()) {
        throw Error(ErrorCode::LengthMismatch, "weight vector has " + std::to_string(a.size()) +
                                                   " entries, bank has " +
                                                   std::to_string(bank.channels()) + " channels");
    }
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (!std::isfinite(a[k]) || a[k] < 0.0 || a[k] > bank.max_weight()) {
            std::ostringstream msg;
            msg << "weight " << a[k] << " for channel " << k << " outside [0, "
                << bank.max_weight() << "]";
            throw Error(ErrorCode::WeightOutOfBounds, msg.str());
        }
    }
}

Spectrum synthesize(const LedBank &bank, const WeightVector &a) {
    check_weights(bank, a);
    return Spectrum(bank.grid(), bank.basis() * a.values());
}

Eigen::Matrix3Xd channel_tristimulus(const LedBank &bank, const Reflectance &r,
                                     const ColorMatcher &c) {
    require_same_grid(bank.grid(), c.grid(), "channel_tristimulus");
    require_same_grid(r.grid(), c.grid(), "channel_tristimulus");
    return c.quadrature_scale() * (c.rows() * (r.values().asDiagonal() * bank.basis()));
}

Eigen::Matrix3Xd channel_tristimulus(const LedBank &bank, const ColorMatcher &c) {
    require_same_grid(bank.grid(), c.grid(), "channel_tristimulus");
    return c.quadrature_scale() * (c.rows() * bank.basis());
}

Spectrum gaussian_spectrum(const SpectralGrid &grid, double peak_nm, double fwhm_nm,
                           double amplitude) {
    const double sigma = fwhm_nm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    Eigen::VectorXd v(static_cast<Eigen::Index>(grid.count()));
    for (std::size_t i = 0; i < grid.count(); ++i) {
        const double d = (grid.wavelength(i) - peak_nm) / sigma;
        v[static_cast<Eigen::Index>(i)] = amplitude * std::exp(-0.5 * d * d);
    }
    return Spectrum(grid, std::move(v));
}

double gaussian_bank_nominal_peak(std::size_t n, std::pair<double, double> peak_range_nm,
                                  std::size_t k) {
    const auto [lo, hi] = peak_range_nm;
    return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
}

LedBank gaussian_bank(std::size_t n, std::pair<double, double> peak_range_nm, double fwhm_nm,
                      const SpectralGrid &grid, std::uint64_t seed, double max_weight) {
    const auto [lo, hi] = peak_range_nm;
    if (n < 2) {
        throw Error(ErrorCode::BadRange, "gaussian_bank needs n >= 2");
    }
    if (!(lo < hi) || lo < grid.start_nm() || hi > grid.end_nm()) {
        std::ostringstream msg;
        msg << "peak range [" << lo << ", " << hi << "] nm not inside grid " << describe(grid);
        throw Error(ErrorCode::BadRange, msg.str());
    }
    if (!(fwhm_nm > 0.0)) {
        throw Error(ErrorCode::BadRange, "gaussian_bank needs a positive FWHM");
    }

    constexpr double max_jitter_nm = 2.0;
    SplitMix64 rng(seed);
    Eigen::MatrixXd basis(static_cast<Eigen::Index>(grid.count()), static_cast<Eigen::Index>(n));
    std::vector<std::string> labels;
    for (std::size_t k = 0; k < n; ++k) {
        const double jitter = max_jitter_nm * (2.0 * rng.uniform() - 1.0);
        const double peak = gaussian_bank_nominal_peak(n, peak_range_nm, k) + jitter;
        basis.col(static_cast<Eigen::Index>(k)) = gaussian_spectrum(grid, peak, fwhm_nm).values();
        char label[32];
        std::snprintf(label, sizeof label, "ch%02zu_%.0fnm", k + 1, peak);
        labels.emplace_back(label);
    }
    char name[64];
    std::snprintf(name, sizeof name, "gaussian-%zu-fwhm%.0f", n, fwhm_nm);
    return LedBank(name, grid, std::move(basis), std::move(labels), max_weight);
}

} // namespace specled
