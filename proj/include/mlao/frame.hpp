#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mlao/common.hpp"

namespace mlao {

/// Real-valued row-major image. Spectra and PSFs stored in a Frame use the
/// DC-centered convention: the origin sits at pixel (width/2, height/2).
class Frame {
public:
    Frame() = default;
    Frame(int width, int height, double fill = 0.0)
        : width_(width), height_(height),
          pixels_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill)
    {
        require(width > 0 && height > 0, "frame dimensions must be positive");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return pixels_.size(); }

    double& at(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
    double at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }

    std::span<double> pixels() { return pixels_; }
    std::span<const double> pixels() const { return pixels_; }
    std::vector<double>& data() { return pixels_; }
    const std::vector<double>& data() const { return pixels_; }

    /// Nominal full-scale value; 8-bit sources map to [0, 1].
    double pixel_value_scale = 1.0;

    double sum() const;
    double max() const;
    double min() const;

    bool same_shape(const Frame& other) const
    {
        return width_ == other.width_ && height_ == other.height_;
    }

    Frame& operator*=(double c);
    Frame& operator+=(const Frame& other);

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> pixels_;
};

Frame operator*(double c, Frame f);
Frame operator+(Frame a, const Frame& b);

/// Circular shift by (dx, dy) pixels.
Frame circular_shift(const Frame& f, int dx, int dy);

} // namespace mlao
