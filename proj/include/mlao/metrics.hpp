#pragma once

#include "mlao/frame.hpp"

namespace mlao {

/// Frequencies are radial |f| in cycles/pixel on the DC-centred grid; band
/// edges are inclusive at the low end and exclusive at the high end.
struct MetricConfig {
    enum class Kind { intensity, fourier, sharpness };
    Kind kind = Kind::intensity;
    double n = 0.1;
    double m = 0.6;
    double f_max = 0.5;

    /// Throws std::invalid_argument naming the violated constraint.
    void validate() const;
};

/// Total signal: sum of all pixels.
double metric_intensity(const Frame& frame);

/// Sum of spectral magnitudes over 0.1 f_max <= |f| < 0.6 f_max.
double metric_fourier(const Frame& frame, const MetricConfig& cfg = {});

/// Spectral magnitude in [n f_max, m f_max) over that in (0, n f_max); the DC
/// bin is excluded from the denominator.
double metric_sharpness(const Frame& frame, const MetricConfig& cfg = {});

/// Dispatches on cfg.kind.
double evaluate_metric(const Frame& frame, const MetricConfig& cfg);

/// Number of DC-centred bins with lo <= |f| < hi.
int annulus_bin_count(int width, int height, double lo, double hi);

} // namespace mlao
