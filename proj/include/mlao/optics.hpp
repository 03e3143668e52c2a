#pragma once

#include <string>

#include "mlao/frame.hpp"
#include "mlao/zernike.hpp"

namespace mlao {

/// Intensity exponent of the PSF model for each modality.
enum class Modality { widefield = 2, two_photon = 4, three_photon = 6 };

inline int exponent(Modality m) { return static_cast<int>(m); }
Modality modality_from_exponent(int l);
/// "wf", "2p" or "3p".
Modality modality_from_string(const std::string& s);
std::string to_string(Modality m);

struct Illumination {
    enum class Kind { uniform, truncated_gaussian };
    Kind kind = Kind::uniform;
    /// Gaussian 1/e amplitude radius relative to the pupil radius.
    double waist_ratio = 1.0;

    static Illumination uniform() { return {}; }
    static Illumination truncated_gaussian(double waist_ratio = 1.0)
    {
        return {Kind::truncated_gaussian, waist_ratio};
    }
    /// Truncated Gaussian for three-photon, uniform otherwise.
    static Illumination default_for(Modality m);
};

/// Circular pupil; amplitude is zero outside the disc of radius
/// radius_ratio * grid_size centred on pixel (n/2, n/2).
struct Pupil {
    Frame amplitude;
    double radius_ratio = 0.25;
    int grid_size = 0;
    Illumination illumination;
};

struct Psf {
    Frame values;
    int exponent = 2;
    double sampling_factor = 1.0;
    bool normalized = false;
};

/// Pupil of arbitrary radius ratio (no sampling calibration).
Pupil make_pupil_with_radius(int grid_size, double radius_ratio, Illumination illumination);

/// Radius ratio at which the aberration-free PSF FWHM is two pixels (base
/// sampling rate) for the given grid, exponent and illumination. Computed
/// by bisection once and cached; safe to call concurrently.
double base_radius_ratio(int grid_size, int exponent, const Illumination& illumination);

/// Pupil whose aberration-free PSF FWHM spans 2 * sampling_factor pixels.
Pupil make_pupil(int grid_size, double sampling_factor, Illumination illumination, int exponent);

/// |DFT(P e^{j phase})|^l, DC-centred. Normalized output sums to one.
Psf psf(const Pupil& pupil, const PhaseMap& phase, int exponent, bool normalized = false);

/// Full width at half maximum along x through the peak, linearly interpolated.
double fwhm(const Psf& p);
double fwhm(const Frame& f);

} // namespace mlao
