#include "mlao/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "mlao/image_io.hpp"

namespace mlao {

SpecimenKind specimen_kind_from_string(const std::string& s)
{
    if (s == "dots") return SpecimenKind::dots;
    if (s == "rings") return SpecimenKind::rings;
    if (s == "discs") return SpecimenKind::discs;
    if (s == "lines") return SpecimenKind::lines;
    if (s == "curves") return SpecimenKind::curves;
    if (s == "mixed") return SpecimenKind::mixed;
    throw std::invalid_argument("unknown specimen kind: " + s);
}

std::string to_string(SpecimenKind k)
{
    switch (k) {
    case SpecimenKind::dots: return "dots";
    case SpecimenKind::rings: return "rings";
    case SpecimenKind::discs: return "discs";
    case SpecimenKind::lines: return "lines";
    case SpecimenKind::curves: return "curves";
    case SpecimenKind::mixed: return "mixed";
    }
    return "mixed";
}

namespace {

struct Point {
    double x;
    double y;
};

double segment_distance(Point p, Point a, Point b)
{
    const double vx = b.x - a.x;
    const double vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

// Shapes are rasterized with one pixel of antialiasing and composited by
// maximum, so every shape has compact support.
class Canvas {
public:
    explicit Canvas(int size) : frame_(size, size) {}

    template <typename Coverage>
    void paint(double x0, double y0, double x1, double y1, double intensity, Coverage&& coverage)
    {
        const int n = frame_.width();
        const int xa = std::max(0, static_cast<int>(std::floor(x0)) - 1);
        const int ya = std::max(0, static_cast<int>(std::floor(y0)) - 1);
        const int xb = std::min(n - 1, static_cast<int>(std::ceil(x1)) + 1);
        const int yb = std::min(n - 1, static_cast<int>(std::ceil(y1)) + 1);
        for (int y = ya; y <= yb; ++y) {
            for (int x = xa; x <= xb; ++x) {
                const double c = std::clamp(coverage(Point{double(x), double(y)}), 0.0, 1.0);
                auto& v = frame_.at(x, y);
                v = std::max(v, intensity * c);
            }
        }
    }

    void disc(Point c, double r, double intensity)
    {
        paint(c.x - r, c.y - r, c.x + r, c.y + r, intensity,
              [&](Point p) { return r + 0.5 - std::hypot(p.x - c.x, p.y - c.y); });
    }

    void ring(Point c, double r, double width, double intensity)
    {
        const double R = r + width;
        paint(c.x - R, c.y - R, c.x + R, c.y + R, intensity,
              [&](Point p) { return 0.5 * width + 0.5 - std::abs(std::hypot(p.x - c.x, p.y - c.y) - r); });
    }

    // Max-compositing per segment equals coverage of the nearest segment.
    void polyline(const std::vector<Point>& pts, double width, double intensity)
    {
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            const Point a = pts[i], b = pts[i + 1];
            paint(std::min(a.x, b.x) - width, std::min(a.y, b.y) - width, std::max(a.x, b.x) + width,
                  std::max(a.y, b.y) + width, intensity,
                  [&](Point p) { return 0.5 * width + 0.5 - segment_distance(p, a, b); });
        }
    }

    Frame& frame() { return frame_; }

private:
    Frame frame_;
};

double uniform(Rng& rng, double a, double b)
{
    return std::uniform_real_distribution<double>(a, b)(rng);
}

int uniform_int(Rng& rng, int a, int b)
{
    return std::uniform_int_distribution<int>(a, b)(rng);
}

void draw_kind(Rng& rng, Canvas& cv, SpecimenKind kind, int n, double density)
{
    auto point = [&] { return Point{uniform(rng, 0, n - 1), uniform(rng, 0, n - 1)}; };
    auto count = [&](int lo, int hi) { return std::max(1, static_cast<int>(std::lround(uniform_int(rng, lo, hi) * density))); };
    const double scale = n / 128.0;
    switch (kind) {
    case SpecimenKind::dots: {
        const int k = count(5, static_cast<int>(80 * scale * scale) + 5);
        for (int i = 0; i < k; ++i) cv.disc(point(), uniform(rng, 0.2, 1.5), uniform(rng, 0.3, 1.0));
        break;
    }
    case SpecimenKind::rings: {
        const int k = count(1, 6);
        for (int i = 0; i < k; ++i) {
            cv.ring(point(), uniform(rng, 3.0, std::max(4.0, n / 6.0)), uniform(rng, 0.5, 2.5), uniform(rng, 0.3, 1.0));
        }
        break;
    }
    case SpecimenKind::discs: {
        const int k = count(1, 8);
        for (int i = 0; i < k; ++i) cv.disc(point(), uniform(rng, 2.0, std::max(3.0, n / 10.0)), uniform(rng, 0.3, 1.0));
        break;
    }
    case SpecimenKind::lines: {
        const int k = count(1, 8);
        for (int i = 0; i < k; ++i) {
            const Point a = point();
            const double len = uniform(rng, n / 8.0, n / 1.5);
            const double ang = uniform(rng, 0, std::numbers::pi);
            const Point b{a.x + len * std::cos(ang), a.y + len * std::sin(ang)};
            cv.polyline({a, b}, uniform(rng, 0.3, 2.5), uniform(rng, 0.3, 1.0));
        }
        break;
    }
    case SpecimenKind::curves: {
        const int k = count(1, 6);
        for (int i = 0; i < k; ++i) {
            const Point a = point();
            const Point b = point();
            const Point c = point();
            std::vector<Point> pts;
            for (int s = 0; s <= 24; ++s) {
                const double t = s / 24.0;
                const double u = 1 - t;
                pts.push_back({u * u * a.x + 2 * u * t * c.x + t * t * b.x, u * u * a.y + 2 * u * t * c.y + t * t * b.y});
            }
            cv.polyline(pts, uniform(rng, 0.3, 2.5), uniform(rng, 0.3, 1.0));
        }
        break;
    }
    case SpecimenKind::mixed: {
        const int layers = uniform_int(rng, 2, 4);
        for (int l = 0; l < layers; ++l) {
            const auto sub = static_cast<SpecimenKind>(uniform_int(rng, 0, 4));
            draw_kind(rng, cv, sub, n, 0.6);
        }
        break;
    }
    }
}

} // namespace

Frame synth_specimen(Rng& rng, SpecimenKind kind, int size)
{
    require(size >= 32, "specimen size must be >= 32");
    for (int attempt = 0;; ++attempt) {
        Canvas cv(size);
        draw_kind(rng, cv, kind, size, 1.0);
        Frame& f = cv.frame();
        const auto nonzero = std::count_if(f.pixels().begin(), f.pixels().end(), [](double v) { return v > 0.0; });
        const double frac = static_cast<double>(nonzero) / static_cast<double>(f.size());
        if ((frac >= 0.001 && frac <= 0.6) || attempt >= 200) {
            if (nonzero == 0) f.at(size / 2, size / 2) = 1.0;
            return f;
        }
    }
}

Frame rotate(const Frame& frame, double angle_rad)
{
    const int w = frame.width();
    const int h = frame.height();
    Frame out(w, h);
    out.pixel_value_scale = frame.pixel_value_scale;
    const double cx = 0.5 * (w - 1);
    const double cy = 0.5 * (h - 1);
    const double c = std::cos(angle_rad);
    const double s = std::sin(angle_rad);
    auto sample = [&](int x, int y) { return (x >= 0 && y >= 0 && x < w && y < h) ? frame.at(x, y) : 0.0; };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double dx = x - cx;
            const double dy = y - cy;
            const double sx = c * dx + s * dy + cx;
            const double sy = -s * dx + c * dy + cy;
            const int x0 = static_cast<int>(std::floor(sx));
            const int y0 = static_cast<int>(std::floor(sy));
            const double fx = sx - x0;
            const double fy = sy - y0;
            double v = (1 - fx) * (1 - fy) * sample(x0, y0);
            if (fx > 0) v += fx * (1 - fy) * sample(x0 + 1, y0);
            if (fy > 0) v += (1 - fx) * fy * sample(x0, y0 + 1);
            if (fx > 0 && fy > 0) v += fx * fy * sample(x0 + 1, y0 + 1);
            out.at(x, y) = std::clamp(v, 0.0, 1.0);
        }
    }
    return out;
}

Frame augment(Rng& rng, const Frame& frame)
{
    require(frame.width() == frame.height(), "augment expects a square frame");
    return rotate(frame, uniform(rng, 0.0, 2.0 * std::numbers::pi));
}

ImageFormer::ImageFormer(const Frame& object) : object_(object), spectrum_(fft2d(object)) {}

Frame ImageFormer::form(const Frame& psf_values) const
{
    require(psf_values.same_shape(object_), "object and PSF sizes differ");
    ComplexGrid k = to_complex(psf_values);
    ifftshift(k);
    fft2d_forward(k);
    for (std::size_t i = 0; i < k.values.size(); ++i) k.values[i] *= spectrum_.values[i];
    fft2d_inverse(k);
    Frame out = real_part(k);
    out.pixel_value_scale = object_.pixel_value_scale;
    for (auto& v : out.data()) v = std::max(v, 0.0);
    return out;
}

Frame form_image(const Frame& object, const Psf& p)
{
    require(object.same_shape(p.values), "object and PSF sizes differ");
    return ImageFormer(object).form(p.values);
}

namespace {

// 1/|f| amplitude filter in unshifted FFT order, cached per size.
const std::vector<double>& pink_filter(int width, int height)
{
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::vector<double>> cache;
    std::lock_guard lock(mutex);
    auto& f = cache[{width, height}];
    if (f.empty()) {
        f.resize(static_cast<std::size_t>(width) * height);
        for (int y = 0; y < height; ++y) {
            const int ky = y < (height + 1) / 2 ? y : y - height;
            for (int x = 0; x < width; ++x) {
                const int kx = x < (width + 1) / 2 ? x : x - width;
                const double r = std::hypot(static_cast<double>(kx) / width, static_cast<double>(ky) / height);
                f[static_cast<std::size_t>(y) * width + x] = r > 0 ? 1.0 / r : 0.0;
            }
        }
    }
    return f;
}

} // namespace

Frame pink_field(Rng& rng, int width, int height)
{
    std::normal_distribution<double> gauss(0.0, 1.0);
    ComplexGrid g(width, height);
    for (auto& v : g.values) v = Complex(gauss(rng), 0.0);
    fft2d_forward(g);
    const auto& filter = pink_filter(width, height);
    for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] *= filter[i];
    fft2d_inverse(g);
    Frame out = real_part(g);
    double mean = out.sum() / out.size();
    double var = 0.0;
    for (auto& v : out.data()) {
        v -= mean;
        var += v * v;
    }
    const double sd = std::sqrt(var / out.size());
    if (sd > 0) out *= 1.0 / sd;
    return out;
}

Frame add_noise(Rng& rng, const Frame& frame, const NoiseConfig& cfg)
{
    require(cfg.valid(), "noise parameters must be non-negative");
    Frame out = frame;
    if (cfg.is_zero()) return out;
    const int w = frame.width();
    const int h = frame.height();
    if (cfg.background_offset > 0) {
        for (auto& v : out.data()) v += cfg.background_offset;
    }
    if (cfg.poisson_peak_counts > 0) {
        for (auto& v : out.data()) {
            const double mean = std::max(v, 0.0) * cfg.poisson_peak_counts;
            const double k = mean > 0 ? static_cast<double>(std::poisson_distribution<long long>(mean)(rng)) : 0.0;
            v = k / cfg.poisson_peak_counts;
        }
    }
    if (cfg.gaussian_sigma > 0) {
        std::normal_distribution<double> gauss(0.0, cfg.gaussian_sigma);
        for (auto& v : out.data()) v += gauss(rng);
    }
    if (cfg.pink_amplitude > 0) {
        const Frame pink = pink_field(rng, w, h);
        for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += cfg.pink_amplitude * pink.data()[i];
    }
    if (cfg.structured_amplitude > 0) {
        // Low-frequency interference fringes plus a faint unrelated structure.
        int kx = 0, ky = 0;
        while (kx == 0 && ky == 0) {
            kx = uniform_int(rng, -4, 4);
            ky = uniform_int(rng, -4, 4);
        }
        const double phase = uniform(rng, 0, 2 * std::numbers::pi);
        const Frame ghost = synth_specimen(rng, SpecimenKind::mixed, std::max(32, std::min(w, h)));
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double fringe = 0.5 * (1.0 + std::cos(2 * std::numbers::pi * (kx * x / double(w) + ky * y / double(h)) + phase));
                const double g = (x < ghost.width() && y < ghost.height()) ? ghost.at(x, y) : 0.0;
                out.at(x, y) += cfg.structured_amplitude * (0.5 * fringe + 0.5 * g);
            }
        }
    }
    for (auto& v : out.data()) v = std::max(v, 0.0);
    return out;
}

Frame resample(const Frame& f, int width, int height)
{
    Frame out(width, height);
    out.pixel_value_scale = f.pixel_value_scale;
    const double sx = static_cast<double>(f.width()) / width;
    const double sy = static_cast<double>(f.height()) / height;
    for (int y = 0; y < height; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, f.height() - 1.0);
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, f.height() - 1);
        const double ty = fy - y0;
        for (int x = 0; x < width; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, f.width() - 1.0);
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, f.width() - 1);
            const double tx = fx - x0;
            out.at(x, y) = (1 - ty) * ((1 - tx) * f.at(x0, y0) + tx * f.at(x1, y0))
                           + ty * ((1 - tx) * f.at(x0, y1) + tx * f.at(x1, y1));
        }
    }
    return out;
}

std::vector<Frame> import_specimens(const std::filesystem::path& dir, int size)
{
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".pgm") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<Frame> out;
    out.reserve(files.size());
    for (const auto& p : files) out.push_back(resample(read_pgm(p), size, size));
    return out;
}

} // namespace mlao
