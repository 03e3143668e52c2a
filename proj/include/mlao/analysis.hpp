#pragma once

#include <array>
#include <ostream>
#include <string>
#include <vector>

#include "mlao/frame.hpp"
#include "mlao/network.hpp"

namespace mlao {

/// RMS of the dense-layer weights grouped by the concatenated source they
/// read from: the input taps (layer 1) and each convolution output (layers 2+).
struct LayerWeightRms {
    std::vector<int> section_rows;
    std::vector<double> rms;
};

template <typename T>
LayerWeightRms layer_weight_rms(const Network<T>& net);
LayerWeightRms layer_weight_rms(const NetworkModel& model);

/// Rows: one per model class; columns layer_1..layer_k.
void write_weight_table(std::ostream& out, const std::vector<std::pair<std::string, LayerWeightRms>>& rows);

using Kernel3 = std::array<double, 9>; // row-major

/// Normalized binomial blur [1 2 1; 2 4 2; 1 2 1] / 16.
Kernel3 blur_kernel();

struct LayerProfile {
    std::vector<double> maxima; // global maximum at each tap (input first)
    std::vector<double> ratios; // maxima[i] / maxima[i-1]; ratios[0] = maxima[0]
};

/// Cascade of zero-padded 3x3 convolution with a fixed kernel followed by
/// 2x2 max pooling. Taps: the input, then each convolution output (before
/// pooling), `layers` of them. The pattern must have maximum 1.
/// Probe patterns with unit peak: a filled disc (radius 0 is a single pixel)
/// and four pixels on a square of side `spacing`, both centred.
Frame disc_pattern(int size, double radius);
Frame four_dot_pattern(int size, int spacing);

LayerProfile layer_response_profile(const Frame& pattern, const Kernel3& filter, int layers = 4);

struct SpectralThreshold {
    double cycles_per_pixel = 0.0;
    bool noise_only = false; // nothing rose above the noise floor
};

/// Noise floor from the mean magnitude of small patches at the four corners
/// of the DC-centred spectrum (the highest frequencies). The spectrum is
/// split into 1-pixel radial rings and 8 angular sectors; the result is the
/// largest ring radius with a fragment mean above `margin` times the floor.
SpectralThreshold spectral_threshold(const Frame& frame, double margin = 2.0);

} // namespace mlao
