#pragma once

#include <vector>

#include "mlao/imaging.hpp"
#include "mlao/optics.hpp"
#include "mlao/zernike.hpp"

namespace mlao {

/// Calibrated pupil plus a precomputed mode basis. PSFs are scaled so that
/// the aberration-free PSF sums to one; aberrated PSFs of nonlinear
/// modalities therefore carry less total signal.
class OpticalSystem {
public:
    OpticalSystem(int grid_size, double sampling_factor, Modality modality, std::vector<int> modes);
    OpticalSystem(int grid_size, double sampling_factor, Modality modality, Illumination illumination,
                  std::vector<int> modes);

    Psf render(const ZernikeVector& aberration) const;
    const Psf& reference() const { return reference_; }
    /// Peak of the aberration-free PSF.
    double reference_peak() const { return reference_peak_; }

    const Pupil& pupil() const { return pupil_; }
    const ZernikeBasis& basis() const { return basis_; }
    Modality modality() const { return modality_; }
    int exponent() const { return mlao::exponent(modality_); }
    int grid_size() const { return pupil_.grid_size; }
    double sampling_factor() const { return sampling_factor_; }

private:
    Pupil pupil_;
    ZernikeBasis basis_;
    Modality modality_;
    double sampling_factor_;
    double scale_ = 1.0;
    Psf reference_;
    double reference_peak_ = 0.0;
};

/// Sorted union of mode lists.
std::vector<int> merge_modes(std::initializer_list<std::span<const int>> lists);

} // namespace mlao
