#include "mlao/optics.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <tuple>

#include "mlao/fft.hpp"

namespace mlao {

Modality modality_from_exponent(int l)
{
    switch (l) {
    case 2: return Modality::widefield;
    case 4: return Modality::two_photon;
    case 6: return Modality::three_photon;
    default: throw std::invalid_argument("PSF exponent must be 2, 4 or 6");
    }
}

Modality modality_from_string(const std::string& s)
{
    if (s == "wf" || s == "widefield") return Modality::widefield;
    if (s == "2p" || s == "two_photon") return Modality::two_photon;
    if (s == "3p" || s == "three_photon") return Modality::three_photon;
    throw std::invalid_argument("unknown modality '" + s + "' (expected wf, 2p or 3p)");
}

std::string to_string(Modality m)
{
    switch (m) {
    case Modality::widefield: return "wf";
    case Modality::two_photon: return "2p";
    case Modality::three_photon: return "3p";
    }
    return "?";
}

Illumination Illumination::default_for(Modality m)
{
    return m == Modality::three_photon ? truncated_gaussian(1.0) : uniform();
}

Pupil make_pupil_with_radius(int grid_size, double radius_ratio, Illumination illumination)
{
    require(grid_size >= 8, "grid size must be >= 8");
    require(radius_ratio > 0.0 && radius_ratio <= 0.5, "radius ratio must lie in (0, 0.5]");
    require(illumination.kind == Illumination::Kind::uniform || illumination.waist_ratio > 0.0,
            "Gaussian waist ratio must be positive");
    Pupil p{Frame(grid_size, grid_size), radius_ratio, grid_size, illumination};
    for (int y = 0; y < grid_size; ++y) {
        for (int x = 0; x < grid_size; ++x) {
            const double rho = pupil_coordinates(x, y, grid_size, radius_ratio).rho;
            if (rho > 1.0) continue;
            double a = 1.0;
            if (illumination.kind == Illumination::Kind::truncated_gaussian) {
                const double r = rho / illumination.waist_ratio;
                a = std::exp(-r * r);
            }
            p.amplitude.at(x, y) = a;
        }
    }
    return p;
}

Psf psf(const Pupil& pupil, const PhaseMap& phase, int l, bool normalized)
{
    require(l == 2 || l == 4 || l == 6, "PSF exponent must be 2, 4 or 6");
    require(phase.values.same_shape(pupil.amplitude), "phase and pupil grids differ");
    const int n = pupil.grid_size;
    ComplexGrid field(n, n);
    const auto amp = pupil.amplitude.pixels();
    const auto ph = phase.values.pixels();
    for (std::size_t i = 0; i < amp.size(); ++i) {
        if (amp[i] != 0.0) field.values[i] = std::polar(amp[i], ph[i]);
    }
    ifftshift(field);
    fft2d_forward(field);
    fftshift(field);

    Psf out{Frame(n, n), l, 1.0, normalized};
    auto v = out.values.pixels();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double I = std::norm(field.values[i]);
        v[i] = l == 2 ? I : (l == 4 ? I * I : I * I * I);
    }
    if (normalized) {
        const double s = out.values.sum();
        if (s > 0.0) out.values *= 1.0 / s;
    }
    return out;
}

double fwhm(const Frame& f)
{
    const auto px = f.pixels();
    std::size_t peak_idx = 0;
    for (std::size_t i = 1; i < px.size(); ++i) {
        if (px[i] > px[peak_idx]) peak_idx = i;
    }
    const double peak = px[peak_idx];
    if (!(peak > f.min())) throw DegenerateInputError("fwhm: image is flat");
    const int w = f.width();
    const int py = static_cast<int>(peak_idx / w);
    const int pxx = static_cast<int>(peak_idx % w);
    const double half = 0.5 * peak;

    auto crossing = [&](int step) {
        int x = pxx;
        while (true) {
            const int nx = x + step;
            if (nx < 0 || nx >= w) throw DegenerateInputError("fwhm: no half-maximum crossing");
            const double a = f.at(x, py);
            const double b = f.at(nx, py);
            if (b <= half) return (x - pxx) + step * (a - half) / (a - b);
            x = nx;
        }
    };
    return crossing(+1) - crossing(-1);
}

double fwhm(const Psf& p)
{
    return fwhm(p.values);
}

namespace {

struct CalibrationKey {
    int grid;
    int exponent;
    int kind;
    double waist;
    auto operator<=>(const CalibrationKey&) const = default;
};

double calibrate(int grid_size, int l, const Illumination& illum)
{
    auto measure = [&](double r) {
        const Pupil p = make_pupil_with_radius(grid_size, r, illum);
        const PhaseMap flat{Frame(grid_size, grid_size),
                            std::vector<unsigned char>(static_cast<std::size_t>(grid_size) * grid_size, 0)};
        return fwhm(psf(p, flat, l, false));
    };
    // FWHM decreases with pupil radius.
    double lo = 2.0 / grid_size;
    double hi = 0.5;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (measure(mid) > 2.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

double base_radius_ratio(int grid_size, int l, const Illumination& illumination)
{
    static std::shared_mutex mutex;
    static std::map<CalibrationKey, double> cache;
    const CalibrationKey key{grid_size, l, static_cast<int>(illumination.kind),
                             illumination.kind == Illumination::Kind::uniform ? 0.0 : illumination.waist_ratio};
    {
        std::shared_lock lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    const double r = calibrate(grid_size, l, illumination);
    std::unique_lock lock(mutex);
    return cache.emplace(key, r).first->second;
}

Pupil make_pupil(int grid_size, double sampling_factor, Illumination illumination, int l)
{
    require(grid_size >= 64 && (grid_size & (grid_size - 1)) == 0, "grid size must be a power of two >= 64");
    require(sampling_factor >= 0.5 && sampling_factor <= 2.0, "sampling factor must lie in [0.5, 2.0]");
    require(l == 2 || l == 4 || l == 6, "PSF exponent must be 2, 4 or 6");
    const double r = base_radius_ratio(grid_size, l, illumination) / sampling_factor;
    require(r <= 0.5, "sampling factor too small: pupil would exceed the grid");
    return make_pupil_with_radius(grid_size, r, illumination);
}

} // namespace mlao
