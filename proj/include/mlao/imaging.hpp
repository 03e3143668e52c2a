#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mlao/fft.hpp"
#include "mlao/frame.hpp"
#include "mlao/optics.hpp"

namespace mlao {

enum class SpecimenKind { dots, rings, discs, lines, curves, mixed };

SpecimenKind specimen_kind_from_string(const std::string& s);
std::string to_string(SpecimenKind k);

/// Random synthetic specimen with values in [0, 1]. The fraction of nonzero
/// pixels is kept within [0.1%, 60%] by redrawing.
Frame synth_specimen(Rng& rng, SpecimenKind kind, int size);

/// Rotation about the frame centre with bilinear resampling, clamped to [0, 1].
Frame rotate(const Frame& frame, double angle_rad);
/// Rotation by a uniformly random angle.
Frame augment(Rng& rng, const Frame& frame);

/// Circular convolution of a specimen with a DC-centred PSF.
Frame form_image(const Frame& object, const Psf& psf);

/// Specimen with its spectrum cached, for repeated imaging of one field.
class ImageFormer {
public:
    explicit ImageFormer(const Frame& object);
    Frame form(const Frame& psf_values) const;
    Frame form(const Psf& p) const { return form(p.values); }
    const Frame& object() const { return object_; }

private:
    Frame object_;
    ComplexGrid spectrum_;
};

struct NoiseConfig {
    double poisson_peak_counts = 0.0; // counts at pixel value 1.0; 0 disables
    double gaussian_sigma = 0.0;
    double pink_amplitude = 0.0;
    double structured_amplitude = 0.0;
    double background_offset = 0.0;

    bool valid() const
    {
        return poisson_peak_counts >= 0 && gaussian_sigma >= 0 && pink_amplitude >= 0
               && structured_amplitude >= 0 && background_offset >= 0;
    }
    bool is_zero() const
    {
        return poisson_peak_counts == 0 && gaussian_sigma == 0 && pink_amplitude == 0
               && structured_amplitude == 0 && background_offset == 0;
    }
};

/// Background offset, Poisson resampling, Gaussian, pink (1/f) and structured
/// noise in that order, then clamping at zero.
Frame add_noise(Rng& rng, const Frame& frame, const NoiseConfig& cfg);

/// Zero-mean, unit-variance field with a 1/|f| amplitude spectrum.
Frame pink_field(Rng& rng, int width, int height);

/// Loads every 8-bit binary PGM in `dir` (sorted by name), resampled to size x size.
std::vector<Frame> import_specimens(const std::filesystem::path& dir, int size);

/// Bilinear resampling to a new size.
Frame resample(const Frame& f, int width, int height);

} // namespace mlao
