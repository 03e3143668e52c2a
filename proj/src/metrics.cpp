#include "mlao/metrics.hpp"

#include <cmath>

#include "mlao/fft.hpp"

namespace mlao {

void MetricConfig::validate() const
{
    require(f_max > 0.0, "f_max must be positive");
    if (kind == Kind::sharpness) {
        require(n > 0.0 && m > n && m < 1.0, "sharpness band requires 1 > m > n > 0");
    }
}

double metric_intensity(const Frame& frame)
{
    return frame.sum();
}

namespace {

ComplexGrid centered_spectrum(const Frame& frame)
{
    auto g = fft2d(frame);
    fftshift(g);
    return g;
}

double band_sum(const ComplexGrid& g, double lo, double hi, bool include_dc)
{
    double s = 0.0;
    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            const double f = centered_frequency(x, y, g.width, g.height);
            if (f == 0.0 && !include_dc) continue;
            if (f >= lo && f < hi) s += std::abs(g.at(x, y));
        }
    }
    return s;
}

} // namespace

int annulus_bin_count(int width, int height, double lo, double hi)
{
    int count = 0;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double f = centered_frequency(x, y, width, height);
            if (f >= lo && f < hi) ++count;
        }
    }
    return count;
}

double metric_fourier(const Frame& frame, const MetricConfig& cfg)
{
    require(cfg.f_max > 0.0, "f_max must be positive");
    return band_sum(centered_spectrum(frame), 0.1 * cfg.f_max, 0.6 * cfg.f_max, true);
}

double metric_sharpness(const Frame& frame, const MetricConfig& cfg)
{
    MetricConfig c = cfg;
    c.kind = MetricConfig::Kind::sharpness;
    c.validate();
    const auto g = centered_spectrum(frame);
    const double low = band_sum(g, 0.0, c.n * c.f_max, false);
    if (!(low > 0.0)) throw DegenerateInputError("sharpness: low-frequency band is empty");
    return band_sum(g, c.n * c.f_max, c.m * c.f_max, true) / low;
}

double evaluate_metric(const Frame& frame, const MetricConfig& cfg)
{
    switch (cfg.kind) {
    case MetricConfig::Kind::intensity: return metric_intensity(frame);
    case MetricConfig::Kind::fourier: return metric_fourier(frame, cfg);
    case MetricConfig::Kind::sharpness: return metric_sharpness(frame, cfg);
    }
    return 0.0;
}

} // namespace mlao
