#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mlao/analysis.hpp"
#include "mlao/config.hpp"
#include "mlao/fft.hpp"

using namespace mlao;

namespace {

// Direct pipeline: zero-padded 3x3 filter, record the maximum, 2x2 max pool.
std::vector<double> brute_maxima(std::vector<std::vector<double>> img, const Kernel3& k, int layers)
{
    std::vector<double> maxima;
    auto global_max = [](const std::vector<std::vector<double>>& a) {
        double m = -1e300;
        for (const auto& row : a)
            for (double v : row) m = std::max(m, v);
        return m;
    };
    maxima.push_back(global_max(img));
    for (int l = 0; l < layers; ++l) {
        const int n = static_cast<int>(img.size());
        std::vector<std::vector<double>> c(n, std::vector<double>(n, 0.0));
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x)
                for (int j = 0; j < 3; ++j)
                    for (int i = 0; i < 3; ++i) {
                        const int sy = y - (j - 1), sx = x - (i - 1);
                        if (sy >= 0 && sy < n && sx >= 0 && sx < n) c[y][x] += k[j * 3 + i] * img[sy][sx];
                    }
        maxima.push_back(global_max(c));
        std::vector<std::vector<double>> p(n / 2, std::vector<double>(n / 2));
        for (int y = 0; y < n / 2; ++y)
            for (int x = 0; x < n / 2; ++x)
                p[y][x] = std::max({c[2 * y][2 * x], c[2 * y][2 * x + 1], c[2 * y + 1][2 * x], c[2 * y + 1][2 * x + 1]});
        img = std::move(p);
    }
    return maxima;
}

std::vector<std::vector<double>> to_rows(const Frame& f)
{
    std::vector<std::vector<double>> r(f.height(), std::vector<double>(f.width()));
    for (int y = 0; y < f.height(); ++y)
        for (int x = 0; x < f.width(); ++x) r[y][x] = f.at(x, y);
    return r;
}

int argmax_layer(const LayerProfile& p)
{
    return static_cast<int>(std::max_element(p.ratios.begin() + 1, p.ratios.end()) - p.ratios.begin()) + 1;
}

// Real field whose spectrum is confined to |f| < cutoff, with random phases.
Frame band_limited(Rng& rng, int n, double cutoff)
{
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    ComplexGrid g(n, n);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            if (centered_frequency(x, y, n, n) < cutoff) g.at(x, y) = std::polar(1.0, u(rng));
    ifftshift(g);
    fft2d_inverse(g);
    return real_part(g);
}

} // namespace

TEST_CASE("weight RMS per tap section")
{
    Rng rng(1);
    auto model = init_model(rng, make_scheme(SchemeTag::two_n, {5, 6, 7, 8, 11}));
    auto r = layer_weight_rms(model);
    CHECK(r.section_rows == std::vector<int>{10, 8, 16, 32, 64});
    REQUIRE(r.rms.size() == 5);
    for (double v : r.rms) CHECK(v > 0.0);

    const auto& dense = model.network.blocks()[8];
    for (std::size_t i = 0; i < dense.size; ++i) model.network.parameters()[dense.offset + i] = -0.37f;
    r = layer_weight_rms(model);
    for (double v : r.rms) CHECK(v == doctest::Approx(0.37).epsilon(1e-6));

    // Section rows of the dense kernel, checked against a direct slice.
    for (std::size_t i = 0; i < dense.size; ++i) model.network.parameters()[dense.offset + i] = static_cast<float>(i / 32);
    r = layer_weight_rms(model);
    double s = 0.0;
    for (int row = 10; row < 18; ++row) s += 32.0 * row * row;
    CHECK(r.rms[1] == doctest::Approx(std::sqrt(s / (8 * 32))).epsilon(1e-9));
}

TEST_CASE("weight table layout")
{
    Rng rng(2);
    const auto a = init_model(rng, make_scheme(SchemeTag::ast2, {5, 6, 7, 8, 11}));
    std::ostringstream out;
    write_weight_table(out, {{"ast2", layer_weight_rms(a)}, {"ast2_b", layer_weight_rms(a)}});
    const auto rows = parse_csv(out.str());
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == std::vector<std::string>{"class", "layer_1", "layer_2", "layer_3", "layer_4", "layer_5"});
    CHECK(rows[1][0] == "ast2");
    CHECK(rows[1].size() == 6);
}

TEST_CASE("layer response profile matches a direct evaluation")
{
    Rng rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Frame f(32, 32);
    for (auto& v : f.data()) v = u(rng);
    f.at(5, 7) = 1.0;
    f *= 1.0 / f.max();
    Kernel3 k;
    for (auto& v : k) v = u(rng) - 0.3;
    const auto p = layer_response_profile(f, k, 4);
    const auto ref = brute_maxima(to_rows(f), k, 4);
    REQUIRE(p.maxima.size() == 5);
    for (int i = 0; i < 5; ++i) CHECK(std::abs(p.maxima[i] - ref[i]) < 1e-12);
    CHECK(p.ratios[0] == p.maxima[0]);
    for (int i = 1; i < 5; ++i) CHECK(p.ratios[i] == doctest::Approx(p.maxima[i] / p.maxima[i - 1]));
    CHECK_THROWS(layer_response_profile(2.0 * f, k, 4));
}

TEST_CASE("layer response behaviours")
{
    const auto k = blur_kernel();
    SUBCASE("large uniform blob keeps ratios nearly constant")
    {
        const auto p = layer_response_profile(disc_pattern(64, 10.0), k, 4);
        for (double r : p.ratios) CHECK(std::abs(r / p.ratios[0] - 1.0) <= 0.2);
    }
    SUBCASE("single dot decays down the layers")
    {
        const auto p = layer_response_profile(disc_pattern(64, 0.0), k, 4);
        CHECK(p.maxima[0] == 1.0);
        for (std::size_t i = 2; i < p.maxima.size(); ++i) {
            CHECK(p.maxima[i] < p.maxima[i - 1]);
            CHECK(p.ratios[i] < 1.0);
        }
    }
    SUBCASE("four-dot spacing moves the strongest layer deeper")
    {
        int previous = 0;
        for (int spacing : {1, 2, 4, 12}) {
            const int layer = argmax_layer(layer_response_profile(four_dot_pattern(64, spacing), k, 4));
            CHECK(layer > previous);
            previous = layer;
        }
    }
}

TEST_CASE("probe patterns")
{
    const auto d = disc_pattern(32, 0.0);
    CHECK(d.sum() == 1.0);
    CHECK(d.at(16, 16) == 1.0);
    const auto q = four_dot_pattern(32, 4);
    CHECK(q.sum() == 4.0);
    CHECK(q.at(14, 14) == 1.0);
    CHECK(q.at(18, 18) == 1.0);
    CHECK(disc_pattern(64, 10.0).sum() > 300.0);
}

TEST_CASE("spectral threshold")
{
    Rng rng(4);
    std::normal_distribution<double> g(0.0, 1.0);
    SUBCASE("band-limited image")
    {
        auto f = band_limited(rng, 128, 0.2);
        double sd = 0.0;
        for (double v : f.pixels()) sd += v * v;
        sd = std::sqrt(sd / f.size());
        for (auto& v : f.data()) v += 1e-4 * sd * g(rng);
        const auto t = spectral_threshold(f);
        CHECK_FALSE(t.noise_only);
        CHECK(t.cycles_per_pixel >= 0.15);
        CHECK(t.cycles_per_pixel <= 0.25);
        const auto t10 = spectral_threshold(10.0 * f);
        CHECK(t10.cycles_per_pixel == t.cycles_per_pixel);
        CHECK(t10.noise_only == t.noise_only);
    }
    SUBCASE("white noise has nothing above the floor")
    {
        Frame f(128, 128);
        for (auto& v : f.data()) v = g(rng);
        CHECK(spectral_threshold(f).noise_only);
        CHECK(spectral_threshold(10.0 * f).noise_only);
    }
}
