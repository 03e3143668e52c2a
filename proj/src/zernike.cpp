#include "mlao/zernike.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mlao {

ZernikeVector::ZernikeVector(std::initializer_list<std::pair<const int, double>> init)
{
    for (const auto& [k, v] : init) set(k, v);
}

ZernikeVector ZernikeVector::from_values(std::span<const int> modes, std::span<const double> values)
{
    require(modes.size() == values.size(), "mode and value counts differ");
    ZernikeVector v;
    for (std::size_t i = 0; i < modes.size(); ++i) v.set(modes[i], values[i]);
    v.correctable_set.assign(modes.begin(), modes.end());
    return v;
}

double ZernikeVector::operator[](int noll) const
{
    auto it = entries_.find(noll);
    return it == entries_.end() ? 0.0 : it->second;
}

void ZernikeVector::set(int noll, double value)
{
    require(noll >= 2, "Zernike vectors hold Noll indices >= 2 (no piston)");
    entries_[noll] = value;
}

void ZernikeVector::add(int noll, double value)
{
    require(noll >= 2, "Zernike vectors hold Noll indices >= 2 (no piston)");
    entries_[noll] += value;
}

std::vector<double> ZernikeVector::values(std::span<const int> modes) const
{
    std::vector<double> out;
    out.reserve(modes.size());
    for (int m : modes) out.push_back((*this)[m]);
    return out;
}

ZernikeVector ZernikeVector::restricted(std::span<const int> modes) const
{
    ZernikeVector out;
    for (int m : modes) {
        if (auto it = entries_.find(m); it != entries_.end()) out.entries_[m] = it->second;
    }
    out.correctable_set.assign(modes.begin(), modes.end());
    return out;
}

ZernikeVector& ZernikeVector::operator+=(const ZernikeVector& o)
{
    for (const auto& [k, v] : o.entries_) entries_[k] += v;
    return *this;
}

ZernikeVector& ZernikeVector::operator-=(const ZernikeVector& o)
{
    for (const auto& [k, v] : o.entries_) entries_[k] -= v;
    return *this;
}

ZernikeVector& ZernikeVector::operator*=(double c)
{
    for (auto& [k, v] : entries_) v *= c;
    return *this;
}

ZernikeVector operator+(ZernikeVector a, const ZernikeVector& b) { return a += b; }
ZernikeVector operator-(ZernikeVector a, const ZernikeVector& b) { return a -= b; }
ZernikeVector operator-(ZernikeVector a) { return a *= -1.0; }
ZernikeVector operator*(double c, ZernikeVector a) { return a *= c; }

double rms(const ZernikeVector& v)
{
    double s = 0.0;
    for (const auto& [k, c] : v.entries()) s += c * c;
    return std::sqrt(s);
}

RadialOrder noll_to_nm(int noll)
{
    require(noll >= 1, "Noll index must be >= 1");
    int n = 0;
    int j = noll - 1;
    while (j > n) {
        ++n;
        j -= n;
    }
    const int p = noll - n * (n + 1) / 2;
    const int k = n % 2;
    int m = ((p + k) / 2) * 2 - k;
    if (m != 0 && noll % 2 != 0) m = -m;
    return {n, m};
}

namespace {

double factorial(int k)
{
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

// Radial polynomial as coefficients of rho^(n - 2s), with the Noll
// normalization folded in.
struct ModeEvaluator {
    int n;
    int m;
    std::vector<double> coefs;

    explicit ModeEvaluator(int noll)
    {
        const auto nm = noll_to_nm(noll);
        n = nm.n;
        m = nm.m;
        const int am = std::abs(m);
        const double norm = m == 0 ? std::sqrt(n + 1.0) : std::sqrt(2.0 * (n + 1.0));
        for (int s = 0; s <= (n - am) / 2; ++s) {
            coefs.push_back(norm * ((s % 2) ? -1.0 : 1.0) * factorial(n - s)
                            / (factorial(s) * factorial((n + am) / 2 - s) * factorial((n - am) / 2 - s)));
        }
    }

    double operator()(double rho, double theta) const
    {
        // Horner in rho^2 from the lowest power rho^(n - 2 smax) upward.
        const int am = std::abs(m);
        const double r2 = rho * rho;
        double r = 0.0;
        for (std::size_t s = 0; s < coefs.size(); ++s) r = r * r2 + coefs[s];
        const int lowest = n - 2 * static_cast<int>(coefs.size() - 1);
        r *= std::pow(rho, lowest);
        if (m == 0) return r;
        return m > 0 ? r * std::cos(am * theta) : r * std::sin(am * theta);
    }
};

} // namespace

double zernike_value(int noll, double rho, double theta)
{
    return ModeEvaluator(noll)(rho, theta);
}

PupilCoordinates pupil_coordinates(int x, int y, int grid_size, double radius_ratio)
{
    const double c = grid_size / 2;
    const double radius = radius_ratio * grid_size;
    const double dx = x - c;
    const double dy = y - c;
    return {std::hypot(dx, dy) / radius, std::atan2(dy, dx)};
}

namespace {

void check_grid(int grid_size, double radius_ratio)
{
    require(grid_size >= 8, "grid size must be >= 8");
    require(radius_ratio > 0.0 && radius_ratio <= 0.5, "radius ratio must lie in (0, 0.5]");
}

PhaseMap empty_phase(int grid_size, double radius_ratio)
{
    PhaseMap p{Frame(grid_size, grid_size), std::vector<unsigned char>(static_cast<std::size_t>(grid_size) * grid_size, 0)};
    for (int y = 0; y < grid_size; ++y) {
        for (int x = 0; x < grid_size; ++x) {
            if (pupil_coordinates(x, y, grid_size, radius_ratio).rho <= 1.0) {
                p.mask[static_cast<std::size_t>(y) * grid_size + x] = 1;
            }
        }
    }
    return p;
}

} // namespace

PhaseMap evaluate_mode(int noll, int grid_size, double radius_ratio)
{
    require(noll >= 1, "Noll index must be >= 1");
    check_grid(grid_size, radius_ratio);
    const ModeEvaluator z(noll);
    PhaseMap p = empty_phase(grid_size, radius_ratio);
    for (int y = 0; y < grid_size; ++y) {
        for (int x = 0; x < grid_size; ++x) {
            if (!p.inside(x, y)) continue;
            const auto [rho, theta] = pupil_coordinates(x, y, grid_size, radius_ratio);
            p.values.at(x, y) = z(rho, theta);
        }
    }
    return p;
}

PhaseMap compose_phase(const ZernikeVector& v, int grid_size, double radius_ratio)
{
    check_grid(grid_size, radius_ratio);
    PhaseMap p = empty_phase(grid_size, radius_ratio);
    for (int y = 0; y < grid_size; ++y) {
        for (int x = 0; x < grid_size; ++x) {
            if (!p.inside(x, y)) continue;
            const auto [rho, theta] = pupil_coordinates(x, y, grid_size, radius_ratio);
            double s = 0.0;
            for (const auto& [noll, c] : v.entries()) {
                if (c != 0.0) s += c * zernike_value(noll, rho, theta);
            }
            p.values.at(x, y) = s;
        }
    }
    return p;
}

ZernikeBasis::ZernikeBasis(std::vector<int> modes, int grid_size, double radius_ratio)
    : modes_(std::move(modes)), grid_size_(grid_size), radius_ratio_(radius_ratio)
{
    check_grid(grid_size, radius_ratio);
    std::vector<PupilCoordinates> coords;
    for (int y = 0; y < grid_size; ++y) {
        for (int x = 0; x < grid_size; ++x) {
            const auto pc = pupil_coordinates(x, y, grid_size, radius_ratio);
            if (pc.rho <= 1.0) {
                pupil_pixels_.push_back(static_cast<std::size_t>(y) * grid_size + x);
                coords.push_back(pc);
            }
        }
    }
    mode_values_.reserve(modes_.size());
    for (int noll : modes_) {
        require(noll >= 1, "Noll index must be >= 1");
        const ModeEvaluator z(noll);
        std::vector<double> vals(coords.size());
        for (std::size_t i = 0; i < coords.size(); ++i) vals[i] = z(coords[i].rho, coords[i].theta);
        mode_values_.push_back(std::move(vals));
    }
}

PhaseMap ZernikeBasis::compose(const ZernikeVector& v) const
{
    PhaseMap p{Frame(grid_size_, grid_size_),
               std::vector<unsigned char>(static_cast<std::size_t>(grid_size_) * grid_size_, 0)};
    for (std::size_t idx : pupil_pixels_) p.mask[idx] = 1;
    auto out = p.values.pixels();
    for (const auto& [noll, c] : v.entries()) {
        if (c == 0.0) continue;
        auto it = std::find(modes_.begin(), modes_.end(), noll);
        require(it != modes_.end(), "mode " + std::to_string(noll) + " is not in the basis");
        const auto& vals = mode_values_[static_cast<std::size_t>(it - modes_.begin())];
        for (std::size_t i = 0; i < pupil_pixels_.size(); ++i) out[pupil_pixels_[i]] += c * vals[i];
    }
    return p;
}

ZernikeVector sample_aberration_in_range(Rng& rng, double lo, double hi, std::span<const int> modes)
{
    require(!modes.empty(), "mode list must not be empty");
    require(lo >= 0.0 && hi >= lo, "norm range must satisfy 0 <= lo <= hi");
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uni(lo, hi);
    std::vector<double> dir(modes.size());
    double n2 = 0.0;
    do {
        n2 = 0.0;
        for (auto& d : dir) {
            d = gauss(rng);
            n2 += d * d;
        }
    } while (n2 == 0.0);
    const double norm = hi > lo ? uni(rng) : lo;
    const double scale = norm / std::sqrt(n2);
    for (auto& d : dir) d *= scale;
    return ZernikeVector::from_values(modes, dir);
}

ZernikeVector sample_aberration(Rng& rng, double max_norm, std::span<const int> modes)
{
    require(max_norm >= 0.0, "max_norm must be >= 0");
    return sample_aberration_in_range(rng, 0.0, max_norm, modes);
}

double pupil_rms(const PhaseMap& phase)
{
    double s = 0.0;
    std::size_t n = 0;
    const auto v = phase.values.pixels();
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!phase.mask[i]) continue;
        s += v[i] * v[i];
        ++n;
    }
    return n ? std::sqrt(s / n) : 0.0;
}

} // namespace mlao
