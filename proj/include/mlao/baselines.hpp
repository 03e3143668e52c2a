#pragma once

#include <vector>

#include "mlao/acquisition.hpp"
#include "mlao/metrics.hpp"
#include "mlao/optics.hpp"
#include "mlao/zernike.hpp"

namespace mlao {

struct BaselineConfig {
    enum class Variant { two_n_plus_one, three_n };
    std::vector<int> modes;
    double bias_depth = 1.0;
    MetricConfig metric;
    Variant variant = Variant::two_n_plus_one;

    void validate() const;
    /// Total intensity for two- and three-photon, sharpness for widefield.
    static MetricConfig default_metric(Modality modality);
    static BaselineConfig for_modality(Variant variant, std::vector<int> modes, Modality modality, double bias_depth = 1.0);
};

struct ParabolicPeak {
    double value = 0.0;
    bool degenerate = false; // parabola not concave; value is the best sample
};

/// Vertex of the parabola through (-b, y_minus), (0, y_zero), (+b, y_plus),
/// clamped to |c| <= 2b. A non-concave triplet returns the abscissa of the
/// largest sample (0 on ties) with the degenerate flag set.
ParabolicPeak parabolic_peak(double y_minus, double y_zero, double y_plus, double b);

/// One zero-bias image shared by all modes plus (+-b) per mode; all modes are
/// fitted at once and applied together. Returns the applied correction.
ZernikeVector run_2n_plus_1(Acquisition& scope, const BaselineConfig& cfg);

/// Per mode in order: (-b, 0, +b) with earlier corrections already applied,
/// fit, apply. Returns the total applied correction.
ZernikeVector run_3n(Acquisition& scope, const BaselineConfig& cfg);

ZernikeVector run_baseline(Acquisition& scope, const BaselineConfig& cfg);

} // namespace mlao
