#pragma once

#include <cstddef>

#include "mlao/frame.hpp"
#include "mlao/zernike.hpp"

namespace mlao {

/// What an estimator may do with a microscope: acquire biased images and
/// drive the corrector. The true aberration is deliberately not reachable
/// through this interface.
class Acquisition {
public:
    virtual ~Acquisition() = default;

    /// Image with the corrector state plus `bias` applied.
    virtual Frame acquire(const ZernikeVector& bias) = 0;
    virtual void apply_correction(const ZernikeVector& delta) = 0;
    virtual const ZernikeVector& corrector_state() const = 0;
    virtual int modality_exponent() const = 0;
    virtual std::size_t images_acquired() const = 0;
};

} // namespace mlao
