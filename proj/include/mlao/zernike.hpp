#pragma once

#include <map>
#include <span>
#include <vector>

#include "mlao/common.hpp"
#include "mlao/frame.hpp"

namespace mlao {

/// Noll-indexed Zernike coefficients in radians (RMS-normalized modes, so a
/// coefficient equals the RMS phase it contributes). Piston is never stored.
class ZernikeVector {
public:
    ZernikeVector() = default;
    ZernikeVector(std::initializer_list<std::pair<const int, double>> init);

    /// Builds a vector over `modes` with the given values (same length).
    static ZernikeVector from_values(std::span<const int> modes, std::span<const double> values);

    double operator[](int noll) const;
    void set(int noll, double value);
    void add(int noll, double value);

    const std::map<int, double>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }

    /// Coefficients for `modes` in order; missing modes read as zero.
    std::vector<double> values(std::span<const int> modes) const;
    /// Copy keeping only `modes`.
    ZernikeVector restricted(std::span<const int> modes) const;

    /// Ordered list of indices this vector spans (labels carry the corrected set).
    std::vector<int> correctable_set;

    ZernikeVector& operator+=(const ZernikeVector& o);
    ZernikeVector& operator-=(const ZernikeVector& o);
    ZernikeVector& operator*=(double c);

    friend bool operator==(const ZernikeVector& a, const ZernikeVector& b)
    {
        return a.entries_ == b.entries_;
    }

private:
    std::map<int, double> entries_;
};

ZernikeVector operator+(ZernikeVector a, const ZernikeVector& b);
ZernikeVector operator-(ZernikeVector a, const ZernikeVector& b);
ZernikeVector operator-(ZernikeVector a);
ZernikeVector operator*(double c, ZernikeVector a);

/// Euclidean norm of the coefficients; equals the RMS phase over the pupil.
double rms(const ZernikeVector& v);

struct RadialOrder {
    int n;
    int m; // signed: m > 0 cosine, m < 0 sine
};

/// Noll index (>= 1) to radial order n and signed azimuthal frequency m.
RadialOrder noll_to_nm(int noll);

/// Noll-normalized Zernike polynomial at polar coordinates (rho <= 1).
double zernike_value(int noll, double rho, double theta);

/// Phase over a square pupil grid. The pupil disc is centred on pixel
/// (n/2, n/2) with radius radius_ratio * n pixels.
struct PhaseMap {
    Frame values;
    std::vector<unsigned char> mask;

    int grid_size() const { return values.width(); }
    bool inside(int x, int y) const
    {
        return mask[static_cast<std::size_t>(y) * values.width() + x] != 0;
    }
};

/// Polar coordinates of pixel (x, y) normalized to the pupil radius.
struct PupilCoordinates {
    double rho;
    double theta;
};
PupilCoordinates pupil_coordinates(int x, int y, int grid_size, double radius_ratio);

PhaseMap evaluate_mode(int noll, int grid_size, double radius_ratio);
PhaseMap compose_phase(const ZernikeVector& v, int grid_size, double radius_ratio);

/// Precomputed mode maps over the pupil pixels for repeated composition.
class ZernikeBasis {
public:
    ZernikeBasis(std::vector<int> modes, int grid_size, double radius_ratio);

    PhaseMap compose(const ZernikeVector& v) const;
    const std::vector<int>& modes() const { return modes_; }
    int grid_size() const { return grid_size_; }
    double radius_ratio() const { return radius_ratio_; }

private:
    std::vector<int> modes_;
    int grid_size_;
    double radius_ratio_;
    std::vector<std::size_t> pupil_pixels_;
    std::vector<std::vector<double>> mode_values_; // per mode, per pupil pixel
};

/// Random vector over `modes` with uniformly distributed direction and a
/// two-norm uniform on [0, max_norm].
ZernikeVector sample_aberration(Rng& rng, double max_norm, std::span<const int> modes);

/// Same direction law, norm uniform on [lo, hi].
ZernikeVector sample_aberration_in_range(Rng& rng, double lo, double hi, std::span<const int> modes);

/// Pupil-masked RMS of a phase map about zero.
double pupil_rms(const PhaseMap& phase);

} // namespace mlao
