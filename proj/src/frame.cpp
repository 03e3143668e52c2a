#include "mlao/frame.hpp"

#include <algorithm>
#include <numeric>

namespace mlao {

double Frame::sum() const
{
    return std::accumulate(pixels_.begin(), pixels_.end(), 0.0);
}

double Frame::max() const
{
    return pixels_.empty() ? 0.0 : *std::max_element(pixels_.begin(), pixels_.end());
}

double Frame::min() const
{
    return pixels_.empty() ? 0.0 : *std::min_element(pixels_.begin(), pixels_.end());
}

Frame& Frame::operator*=(double c)
{
    for (auto& v : pixels_) v *= c;
    return *this;
}

Frame& Frame::operator+=(const Frame& other)
{
    require(same_shape(other), "frame shapes differ");
    for (std::size_t i = 0; i < pixels_.size(); ++i) pixels_[i] += other.pixels_[i];
    return *this;
}

Frame operator*(double c, Frame f)
{
    f *= c;
    return f;
}

Frame operator+(Frame a, const Frame& b)
{
    a += b;
    return a;
}

Frame circular_shift(const Frame& f, int dx, int dy)
{
    Frame out(f.width(), f.height());
    out.pixel_value_scale = f.pixel_value_scale;
    const int w = f.width();
    const int h = f.height();
    for (int y = 0; y < h; ++y) {
        const int ty = ((y + dy) % h + h) % h;
        for (int x = 0; x < w; ++x) {
            const int tx = ((x + dx) % w + w) % w;
            out.at(tx, ty) = f.at(x, y);
        }
    }
    return out;
}

} // namespace mlao
