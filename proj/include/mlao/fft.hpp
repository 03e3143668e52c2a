#pragma once

#include <complex>
#include <span>
#include <vector>

#include "mlao/frame.hpp"

namespace mlao {

using Complex = std::complex<double>;

/// Row-major complex 2D array, same layout as Frame.
struct ComplexGrid {
    int width = 0;
    int height = 0;
    std::vector<Complex> values;

    ComplexGrid() = default;
    ComplexGrid(int w, int h) : width(w), height(h), values(static_cast<std::size_t>(w) * h) {}

    Complex& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
    const Complex& at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

/// In-place unnormalized forward DFT (exponent sign -1).
void fft2d_forward(ComplexGrid& grid);
/// In-place inverse DFT including the 1/(w*h) factor.
void fft2d_inverse(ComplexGrid& grid);

ComplexGrid to_complex(const Frame& f);
ComplexGrid fft2d(const Frame& f);
Frame real_part(const ComplexGrid& g);
Frame magnitude(const ComplexGrid& g);

/// Moves the origin from index 0 to index n/2 along each axis.
template <typename T>
void fftshift(std::span<T> data, int width, int height)
{
    std::vector<T> tmp(data.begin(), data.end());
    const int sx = width / 2;
    const int sy = height / 2;
    for (int y = 0; y < height; ++y) {
        const int ty = (y + sy) % height;
        for (int x = 0; x < width; ++x) {
            const int tx = (x + sx) % width;
            data[static_cast<std::size_t>(ty) * width + tx] = tmp[static_cast<std::size_t>(y) * width + x];
        }
    }
}

/// Inverse of fftshift (moves the origin from n/2 back to 0).
template <typename T>
void ifftshift(std::span<T> data, int width, int height)
{
    std::vector<T> tmp(data.begin(), data.end());
    const int sx = width - width / 2;
    const int sy = height - height / 2;
    for (int y = 0; y < height; ++y) {
        const int ty = (y + sy) % height;
        for (int x = 0; x < width; ++x) {
            const int tx = (x + sx) % width;
            data[static_cast<std::size_t>(ty) * width + tx] = tmp[static_cast<std::size_t>(y) * width + x];
        }
    }
}

inline void fftshift(ComplexGrid& g) { fftshift(std::span<Complex>(g.values), g.width, g.height); }
inline void ifftshift(ComplexGrid& g) { ifftshift(std::span<Complex>(g.values), g.width, g.height); }
inline void fftshift(Frame& f) { fftshift(f.pixels(), f.width(), f.height()); }
inline void ifftshift(Frame& f) { ifftshift(f.pixels(), f.width(), f.height()); }

/// Radial frequency |f| in cycles/pixel of pixel (x, y) on a DC-centered grid.
double centered_frequency(int x, int y, int width, int height);

} // namespace mlao
