#pragma once

#include <span>
#include <vector>

#include "mlao/frame.hpp"
#include "mlao/scheme.hpp"

namespace mlao {

inline constexpr int kStackSize = 32;
inline constexpr double kDefaultEpsilon = 1e-3;

/// Network input: one 32x32 channel per ratio. For each bias pair (I+, I-)
/// the channels are ratio(I+/I-) followed by ratio(I-/I+).
struct PseudoStack {
    std::vector<Frame> channels;
    SchemeTag scheme_tag = SchemeTag::ast2;

    int channel_count() const { return static_cast<int>(channels.size()); }
    /// Channel-major copy of all pixels.
    std::vector<double> flatten() const;
};

/// Regularized spectral ratio F(i1) conj(F(i2)) / (|F(i2)|^2 + eps^2) with
/// eps = epsilon * max|F(i2)|, inverse transformed, real part, DC-centred.
Frame compute_pseudo_psf(const Frame& i1, const Frame& i2, double epsilon = kDefaultEpsilon);

/// out_size x out_size block centred on pixel (w/2, h/2).
Frame crop_center(const Frame& frame, int out_size = kStackSize);

/// Channels in scheme order from images acquired in CorrectionScheme::biases() order.
PseudoStack build_input_stack(std::span<const Frame> images, const CorrectionScheme& scheme,
                              double epsilon = kDefaultEpsilon);

} // namespace mlao
