#include "mlao/analysis.hpp"

#include <cmath>
#include <numbers>

#include "mlao/config.hpp"
#include "mlao/fft.hpp"

namespace mlao {

template <typename T>
LayerWeightRms layer_weight_rms(const Network<T>& net)
{
    const auto& a = net.architecture();
    LayerWeightRms r;
    r.section_rows.push_back(a.input_channels);
    for (int w : a.conv_widths) r.section_rows.push_back(w);
    const auto dense = net.dense_kernel();
    std::size_t row = 0;
    for (int rows : r.section_rows) {
        double s = 0.0;
        const std::size_t begin = row * a.hidden;
        const std::size_t end = (row + rows) * a.hidden;
        for (std::size_t i = begin; i < end; ++i) s += static_cast<double>(dense[i]) * dense[i];
        r.rms.push_back(std::sqrt(s / static_cast<double>(end - begin)));
        row += rows;
    }
    return r;
}

template LayerWeightRms layer_weight_rms<float>(const Network<float>&);
template LayerWeightRms layer_weight_rms<double>(const Network<double>&);

LayerWeightRms layer_weight_rms(const NetworkModel& model) { return layer_weight_rms(model.network); }

void write_weight_table(std::ostream& out, const std::vector<std::pair<std::string, LayerWeightRms>>& rows)
{
    CsvWriter csv(out);
    std::size_t cols = 0;
    for (const auto& [name, r] : rows) cols = std::max(cols, r.rms.size());
    std::vector<std::string> header{"class"};
    for (std::size_t i = 0; i < cols; ++i) header.push_back("layer_" + std::to_string(i + 1));
    csv.row(header);
    for (const auto& [name, r] : rows) {
        std::vector<std::string> fields{name};
        for (double v : r.rms) fields.push_back(format_double(v));
        csv.row(fields);
    }
}

Kernel3 blur_kernel()
{
    return {1 / 16.0, 2 / 16.0, 1 / 16.0, 2 / 16.0, 4 / 16.0, 2 / 16.0, 1 / 16.0, 2 / 16.0, 1 / 16.0};
}

namespace {

Frame convolve3(const Frame& in, const Kernel3& k)
{
    const int w = in.width(), h = in.height();
    Frame out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int sx = x - dx, sy = y - dy;
                    if (sx < 0 || sy < 0 || sx >= w || sy >= h) continue;
                    s += k[(dy + 1) * 3 + (dx + 1)] * in.at(sx, sy);
                }
            }
            out.at(x, y) = s;
        }
    }
    return out;
}

Frame max_pool2(const Frame& in)
{
    Frame out(in.width() / 2, in.height() / 2);
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            out.at(x, y) = std::max({in.at(2 * x, 2 * y), in.at(2 * x + 1, 2 * y), in.at(2 * x, 2 * y + 1),
                                     in.at(2 * x + 1, 2 * y + 1)});
        }
    }
    return out;
}

} // namespace

Frame disc_pattern(int size, double radius)
{
    require(size > 0 && radius >= 0.0, "disc pattern needs a positive size and non-negative radius");
    Frame f(size, size);
    const int c = size / 2;
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            if (std::hypot(x - c, y - c) <= radius) f.at(x, y) = 1.0;
    return f;
}

Frame four_dot_pattern(int size, int spacing)
{
    require(spacing >= 1 && spacing < size, "four-dot spacing must be in [1, size)");
    Frame f(size, size);
    const int x0 = size / 2 - spacing / 2;
    for (int dy : {0, spacing})
        for (int dx : {0, spacing}) f.at(x0 + dx, x0 + dy) = 1.0;
    return f;
}

LayerProfile layer_response_profile(const Frame& pattern, const Kernel3& filter, int layers)
{
    require(layers >= 1, "profile needs at least one layer");
    require(std::abs(pattern.max() - 1.0) <= 1e-9, "pattern maximum must be 1");
    require(pattern.width() % (1 << layers) == 0 && pattern.height() % (1 << layers) == 0,
            "pattern size must be divisible by 2 for every pooling stage");
    LayerProfile p;
    p.maxima.push_back(pattern.max());
    Frame x = pattern;
    for (int l = 0; l < layers; ++l) {
        const Frame c = convolve3(x, filter);
        p.maxima.push_back(c.max());
        x = max_pool2(c);
    }
    p.ratios.push_back(p.maxima[0]);
    for (std::size_t i = 1; i < p.maxima.size(); ++i)
        p.ratios.push_back(p.maxima[i - 1] != 0.0 ? p.maxima[i] / p.maxima[i - 1] : 0.0);
    return p;
}

SpectralThreshold spectral_threshold(const Frame& frame, double margin)
{
    const int w = frame.width(), h = frame.height();
    require(w > 8 && h > 8, "spectral threshold needs a frame larger than 8x8");
    require(margin >= 1.0, "noise margin must be >= 1");
    auto spec = fft2d(frame);
    fftshift(spec);
    const Frame mag = magnitude(spec);

    const int patch = std::max(2, std::min(w, h) / 32);
    double floor_sum = 0.0;
    int floor_n = 0;
    for (int cy : {0, h - patch}) {
        for (int cx : {0, w - patch}) {
            for (int y = cy; y < cy + patch; ++y) {
                for (int x = cx; x < cx + patch; ++x) {
                    floor_sum += mag.at(x, y);
                    ++floor_n;
                }
            }
        }
    }
    const double floor = floor_sum / floor_n;

    constexpr int sectors = 8;
    const int n = std::min(w, h);
    const int rings = n / 2;
    std::vector<double> sum(static_cast<std::size_t>(rings) * sectors, 0.0);
    std::vector<int> count(sum.size(), 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double f = centered_frequency(x, y, w, h);
            const int ring = static_cast<int>(std::floor(f * n));
            if (ring < 1 || ring >= rings) continue;
            double ang = std::atan2(static_cast<double>(y - h / 2) / h, static_cast<double>(x - w / 2) / w);
            if (ang < 0) ang += 2 * std::numbers::pi;
            const int sector = std::min(sectors - 1, static_cast<int>(ang / (2 * std::numbers::pi) * sectors));
            const std::size_t idx = static_cast<std::size_t>(ring) * sectors + sector;
            sum[idx] += mag.at(x, y);
            ++count[idx];
        }
    }
    SpectralThreshold r;
    int best = 0;
    for (int ring = 1; ring < rings; ++ring) {
        for (int s = 0; s < sectors; ++s) {
            const std::size_t idx = static_cast<std::size_t>(ring) * sectors + s;
            if (count[idx] > 0 && sum[idx] / count[idx] > margin * floor) best = ring;
        }
    }
    if (best == 0) {
        r.noise_only = true;
        return r;
    }
    r.cycles_per_pixel = (best + 0.5) / n;
    return r;
}

} // namespace mlao
