#pragma once

// LED banks and illuminant synthesis w = sum_k alpha_k e_k.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "specled/spectral.hpp"

namespace specled {

/// Drive levels alpha_k, one per bank channel.
class WeightVector {
public:
    WeightVector() = default;
    explicit WeightVector(Eigen::VectorXd weights) : weights_(std::move(weights)) {}
    WeightVector(std::initializer_list<double> weights)
        : weights_(Eigen::Map<const Eigen::VectorXd>(weights.begin(),
                                                     static_cast<Eigen::Index>(weights.size()))) {}

    static WeightVector zeros(std::size_t n) {
        return WeightVector(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)));
    }
    static WeightVector one_hot(std::size_t n, std::size_t k, double level = 1.0) {
        Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        w[static_cast<Eigen::Index>(k)] = level;
        return WeightVector(std::move(w));
    }

    const Eigen::VectorXd &values() const { return weights_; }
    std::size_t size() const { return static_cast<std::size_t>(weights_.size()); }
    double operator[](std::size_t k) const { return weights_[static_cast<Eigen::Index>(k)]; }

    bool operator==(const WeightVector &other) const {
        return weights_.size() == other.weights_.size() && weights_ == other.weights_;
    }

private:
    Eigen::VectorXd weights_;
};

/// N basis spectra on one grid, stored column-wise as an M x N matrix.
class LedBank {
public:
    LedBank(std::string name, SpectralGrid grid, Eigen::MatrixXd basis,
            std::vector<std::string> channel_labels, double max_weight = 1.0);

    const std::string &name() const { return name_; }
    const SpectralGrid &grid() const { return grid_; }
    const Eigen::MatrixXd &basis() const { return basis_; }
    const std::vector<std::string> &channel_labels() const { return labels_; }
    double max_weight() const { return max_weight_; }
    std::size_t channels() const { return static_cast<std::size_t>(basis_.cols()); }

    Spectrum channel(std::size_t k) const;

    /// Bank restricted to the listed channels, in the listed order.
    LedBank subset(std::span<const std::size_t> channels) const;

private:
    std::string name_;
    SpectralGrid grid_;
    Eigen::MatrixXd basis_;
    std::vector<std::string> labels_;
    double max_weight_;
};

/// Throws LengthMismatch or WeightOutOfBounds.
void check_weights(const LedBank &bank, const WeightVector &a);

Spectrum synthesize(const LedBank &bank, const WeightVector &a);

/// Per-channel tristimulus values as a 3 x N matrix: column k is
/// tristimulus(e_k, r, c). XYZ of a synthesized light is then T * alpha.
Eigen::Matrix3Xd channel_tristimulus(const LedBank &bank, const Reflectance &r,
                                     const ColorMatcher &c);
Eigen::Matrix3Xd channel_tristimulus(const LedBank &bank, const ColorMatcher &c);

/// `n` unit-amplitude Gaussian channels, peaks evenly spaced over
/// [peak_lo_nm, peak_hi_nm] and each jittered by at most +-2 nm from `seed`.
LedBank gaussian_bank(std::size_t n, std::pair<double, double> peak_range_nm, double fwhm_nm,
                      const SpectralGrid &grid, std::uint64_t seed, double max_weight = 1.0);

/// Nominal (un-jittered) peak wavelength of channel k in a gaussian_bank.
double gaussian_bank_nominal_peak(std::size_t n, std::pair<double, double> peak_range_nm,
                                  std::size_t k);

Spectrum gaussian_spectrum(const SpectralGrid &grid, double peak_nm, double fwhm_nm,
                           double amplitude = 1.0);

} // namespace specled
