#include "mlao/pseudo_psf.hpp"

#include <algorithm>
#include <cmath>

#include "mlao/fft.hpp"

namespace mlao {

std::vector<double> PseudoStack::flatten() const
{
    std::vector<double> out;
    for (const auto& c : channels) out.insert(out.end(), c.pixels().begin(), c.pixels().end());
    return out;
}

namespace {

Frame spectral_ratio(const ComplexGrid& f1, const ComplexGrid& f2, double epsilon)
{
    double peak = 0.0;
    for (const auto& v : f2.values) peak = std::max(peak, std::abs(v));
    if (!(peak > 0.0)) throw DegenerateInputError("pseudo-PSF: denominator image is zero");
    const double eps2 = (epsilon * peak) * (epsilon * peak);
    ComplexGrid r(f1.width, f1.height);
    for (std::size_t i = 0; i < r.values.size(); ++i) {
        r.values[i] = f1.values[i] * std::conj(f2.values[i]) * (1.0 / (std::norm(f2.values[i]) + eps2));
    }
    fft2d_inverse(r);
    fftshift(r);
    return real_part(r);
}

} // namespace

Frame compute_pseudo_psf(const Frame& i1, const Frame& i2, double epsilon)
{
    require(i1.same_shape(i2), "pseudo-PSF inputs differ in size");
    require(epsilon >= 0.0, "epsilon must be non-negative");
    return spectral_ratio(fft2d(i1), fft2d(i2), epsilon);
}

Frame crop_center(const Frame& frame, int out_size)
{
    require(out_size > 0 && frame.width() >= out_size && frame.height() >= out_size,
            "frame is smaller than the crop");
    const int x0 = frame.width() / 2 - out_size / 2;
    const int y0 = frame.height() / 2 - out_size / 2;
    Frame out(out_size, out_size);
    out.pixel_value_scale = frame.pixel_value_scale;
    for (int y = 0; y < out_size; ++y) {
        for (int x = 0; x < out_size; ++x) out.at(x, y) = frame.at(x0 + x, y0 + y);
    }
    return out;
}

PseudoStack build_input_stack(std::span<const Frame> images, const CorrectionScheme& scheme, double epsilon)
{
    require(static_cast<int>(images.size()) == scheme.images_per_cycle(),
            "image count " + std::to_string(images.size()) + " does not match scheme " + to_string(scheme.tag)
                + " (expects " + std::to_string(scheme.images_per_cycle()) + ")");
    PseudoStack stack;
    stack.scheme_tag = scheme.tag;
    for (std::size_t p = 0; p + 1 < images.size(); p += 2) {
        const auto plus = fft2d(images[p]);
        const auto minus = fft2d(images[p + 1]);
        stack.channels.push_back(crop_center(spectral_ratio(plus, minus, epsilon)));
        stack.channels.push_back(crop_center(spectral_ratio(minus, plus, epsilon)));
    }
    return stack;
}

} // namespace mlao
