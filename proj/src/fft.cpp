#include "mlao/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace mlao {
namespace {

// FFTW planning is not thread-safe; execution with new-array calls is.
// Plans are unaligned in-place plans so any std::vector buffer can be used.
class PlanCache {
public:
    ~PlanCache()
    {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(int width, int height, int sign)
    {
        std::lock_guard lock(mutex_);
        const auto key = std::make_tuple(width, height, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        std::vector<Complex> scratch(static_cast<std::size_t>(width) * height);
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan plan = fftw_plan_dft_2d(height, width, buf, buf, sign,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache()
{
    static PlanCache cache;
    return cache;
}

void execute(ComplexGrid& grid, int sign)
{
    require(grid.width > 0 && grid.height > 0, "empty grid");
    fftw_plan plan = plan_cache().get(grid.width, grid.height, sign);
    auto* buf = reinterpret_cast<fftw_complex*>(grid.values.data());
    fftw_execute_dft(plan, buf, buf);
}

} // namespace

void fft2d_forward(ComplexGrid& grid)
{
    execute(grid, FFTW_FORWARD);
}

void fft2d_inverse(ComplexGrid& grid)
{
    execute(grid, FFTW_BACKWARD);
    const double scale = 1.0 / (static_cast<double>(grid.width) * grid.height);
    for (auto& v : grid.values) v *= scale;
}

ComplexGrid to_complex(const Frame& f)
{
    ComplexGrid g(f.width(), f.height());
    const auto px = f.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) g.values[i] = Complex(px[i], 0.0);
    return g;
}

ComplexGrid fft2d(const Frame& f)
{
    auto g = to_complex(f);
    fft2d_forward(g);
    return g;
}

Frame real_part(const ComplexGrid& g)
{
    Frame f(g.width, g.height);
    auto px = f.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = g.values[i].real();
    return f;
}

Frame magnitude(const ComplexGrid& g)
{
    Frame f(g.width, g.height);
    auto px = f.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = std::abs(g.values[i]);
    return f;
}

double centered_frequency(int x, int y, int width, int height)
{
    const double fx = static_cast<double>(x - width / 2) / width;
    const double fy = static_cast<double>(y - height / 2) / height;
    return std::hypot(fx, fy);
}

} // namespace mlao
