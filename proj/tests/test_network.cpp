#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "mlao/network.hpp"
#include "mlao/scheme.hpp"

using namespace mlao;

namespace {

// Closed-form parameter count, layer by layer.
std::size_t expected_count(int mc, int n)
{
    const int widths[4] = {8, 16, 32, 64};
    std::size_t total = 0;
    int in = mc;
    for (int w : widths) {
        total += static_cast<std::size_t>(3 * 3 * in * w + w);
        in = w;
    }
    const int concat = mc + 8 + 16 + 32 + 64;
    total += static_cast<std::size_t>(concat * 32 + 32);
    total += static_cast<std::size_t>(32 * n + n);
    return total;
}

Architecture tiny_arch()
{
    Architecture a;
    a.input_channels = 2;
    a.input_size = 8;
    a.conv_widths = {3, 4};
    a.hidden = 5;
    a.outputs = 3;
    return a;
}

template <typename T>
std::vector<T> random_values(Rng& rng, std::size_t n, double lo, double hi)
{
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<T> v(n);
    for (auto& x : v) x = static_cast<T>(u(rng));
    return v;
}

template <typename T>
void randomize(Network<T>& net, Rng& rng, double scale)
{
    std::uniform_real_distribution<double> u(-scale, scale);
    for (auto& p : net.parameters()) p = static_cast<T>(u(rng));
}

struct Batch {
    std::vector<std::vector<double>> inputs;
    std::vector<std::vector<double>> labels;
    std::vector<Example<double>> examples;
};

Batch random_batch(Rng& rng, const Network<double>& net, int count)
{
    Batch b;
    for (int i = 0; i < count; ++i) {
        b.inputs.push_back(random_values<double>(rng, net.input_length(), -1.0, 1.0));
        b.labels.push_back(random_values<double>(rng, net.architecture().outputs, -1.0, 1.0));
    }
    for (int i = 0; i < count; ++i) b.examples.push_back({b.inputs[i], b.labels[i]});
    return b;
}

} // namespace

TEST_CASE("parameter counts")
{
    CHECK(expected_count(2, 9) == 28689);
    Rng rng(1);
    for (int mc : {2, 4, 10, 18, 28})
        for (int n : {5, 7, 8, 9}) {
            const auto net = init_network(rng, mc, n);
            CHECK(net.parameter_count() == expected_count(mc, n));
            CHECK(net.architecture().parameter_count() == expected_count(mc, n));
            CHECK(net.parameter_count() >= kMinParameters);
            CHECK(net.parameter_count() <= kMaxParameters);
        }
    CHECK(init_network(rng, 2, 9).parameter_count() == 28689);
    CHECK(init_network(rng, 18, 9).parameter_count() == 30353);
    CHECK_THROWS_AS(init_network(rng, 36, 9), std::invalid_argument);
}

TEST_CASE("block layout")
{
    const Network<double> net(tiny_arch());
    const auto& b = net.blocks();
    REQUIRE(b.size() == 8);
    const std::size_t sizes[8] = {2 * 3 * 9, 3, 3 * 4 * 9, 4, (2 + 3 + 4) * 5, 5, 5 * 3, 3};
    std::size_t offset = 0;
    for (int i = 0; i < 8; ++i) {
        CHECK(b[i].offset == offset);
        CHECK(b[i].size == sizes[i]);
        CHECK(b[i].is_kernel == (i % 2 == 0));
        offset += sizes[i];
    }
    CHECK(offset == net.parameter_count());
}

TEST_CASE("initialisation is reproducible")
{
    Rng a(42), b(42), c(43);
    const auto na = init_network(a, 2, 5);
    const auto nb = init_network(b, 2, 5);
    const auto nc = init_network(c, 2, 5);
    CHECK(std::equal(na.parameters().begin(), na.parameters().end(), nb.parameters().begin()));
    CHECK_FALSE(std::equal(na.parameters().begin(), na.parameters().end(), nc.parameters().begin()));
    for (int l = 0; l < 4; ++l)
        for (float v : na.conv_bias(l)) CHECK(v == 0.0f);
}

TEST_CASE("zero input propagates to the output bias")
{
    Rng rng(3);
    auto net = init_network(rng, 2, 5);
    const auto& blocks = net.blocks();
    auto p = net.parameters();
    for (std::size_t i = 0; i + 2 < blocks.size(); ++i)
        if (!blocks[i].is_kernel) std::fill_n(p.begin() + blocks[i].offset, blocks[i].size, 0.0f);
    const auto& ob = blocks.back();
    for (std::size_t j = 0; j < ob.size; ++j) p[ob.offset + j] = 0.1f * (j + 1);
    const std::vector<float> zeros(net.input_length(), 0.0f);
    const auto out = net.forward(zeros);
    REQUIRE(out.size() == 5);
    for (std::size_t j = 0; j < 5; ++j) CHECK(out[j] == p[ob.offset + j]);
}

TEST_CASE("swapping input channels changes the output")
{
    Rng rng(8);
    const auto net = init_network(rng, 2, 5);
    const auto input = random_values<float>(rng, net.input_length(), 0.0, 1.0);
    std::vector<float> swapped(input.size());
    const std::size_t plane = input.size() / 2;
    std::copy(input.begin() + plane, input.end(), swapped.begin());
    std::copy(input.begin(), input.begin() + plane, swapped.begin() + plane);
    const auto a = net.forward(input);
    const auto b = net.forward(swapped);
    double diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) diff += std::abs(a[i] - b[i]);
    CHECK(diff > 1e-6);
    CHECK(a == net.forward(input));
}

TEST_CASE("tiny network matches a hand-worked forward pass")
{
    Architecture a;
    a.input_channels = 1;
    a.input_size = 4;
    a.conv_widths = {1};
    a.hidden = 1;
    a.outputs = 1;
    Network<double> net(a);
    REQUIRE(net.parameter_count() == 15);
    const double k[9] = {0.1, -0.2, 0.3, 0.05, 0.4, -0.1, 0.2, 0.0, -0.3};
    const double conv_b = 0.05, wd0 = 0.7, wd1 = -0.4, bd = 0.1, wo = 1.3, bo = -0.2;
    auto p = net.parameters();
    std::copy(k, k + 9, p.begin());
    p[9] = conv_b;
    p[10] = wd0;
    p[11] = wd1;
    p[12] = bd;
    p[13] = wo;
    p[14] = bo;

    double in[4][4];
    std::vector<double> flat;
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            in[y][x] = std::sin(1.7 * x + 0.9 * y) * 0.8;
            flat.push_back(in[y][x]);
        }
    // Zero-padded 3x3 correlation, tanh, 2x2 max pooling, global maxima.
    double act[4][4];
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            double s = conv_b;
            for (int ky = 0; ky < 3; ++ky)
                for (int kx = 0; kx < 3; ++kx) {
                    const int sy = y + ky - 1, sx = x + kx - 1;
                    if (sy >= 0 && sy < 4 && sx >= 0 && sx < 4) s += k[ky * 3 + kx] * in[sy][sx];
                }
            act[y][x] = std::tanh(s);
        }
    double in_max = -1e300, act_max = -1e300;
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            in_max = std::max(in_max, in[y][x]);
            act_max = std::max(act_max, act[y][x]);
        }
    const double hidden = std::tanh(wd0 * in_max + wd1 * act_max + bd);
    const double expect = wo * hidden + bo;

    const auto out = net.forward(flat);
    REQUIRE(out.size() == 1);
    CHECK(std::abs(out[0] - expect) < 1e-12);
}

TEST_CASE("perfect predictions give zero loss and zero data gradient")
{
    Rng rng(5);
    Network<double> net(tiny_arch());
    randomize(net, rng, 0.5);
    auto batch = random_batch(rng, net, 3);
    batch.examples.clear();
    for (std::size_t i = 0; i < batch.inputs.size(); ++i) batch.labels[i] = net.forward(batch.inputs[i]);
    for (std::size_t i = 0; i < batch.inputs.size(); ++i) batch.examples.push_back({batch.inputs[i], batch.labels[i]});
    const auto r = loss_and_grad_serial<double>(net, batch.examples, Regularization{0.0, 0.0});
    CHECK(r.loss == 0.0);
    for (double g : r.grad) CHECK(g == 0.0);
}

TEST_CASE("gradients match central finite differences")
{
    Rng rng(2024);
    Network<double> net(tiny_arch());
    randomize(net, rng, 0.6);
    const auto batch = random_batch(rng, net, 4);
    const Regularization reg{1e-3, 1e-3};
    const auto r = loss_and_grad_serial<double>(net, batch.examples, reg);
    CHECK(r.loss == doctest::Approx(batch_loss<double>(net, batch.examples, reg)).epsilon(1e-12));

    const double h = 1e-4;
    auto p = net.parameters();
    double worst = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double w = p[i];
        p[i] = w + h;
        const double up = batch_loss<double>(net, batch.examples, reg);
        p[i] = w - h;
        const double down = batch_loss<double>(net, batch.examples, reg);
        p[i] = w;
        const double fd = (up - down) / (2 * h);
        const double rel = std::abs(fd - r.grad[i]) / std::max({std::abs(fd), std::abs(r.grad[i]), 1e-6});
        worst = std::max(worst, rel);
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("l1 subgradient at zero is zero")
{
    Network<double> net(tiny_arch());
    Rng rng(9);
    randomize(net, rng, 0.5);
    net.parameters()[0] = 0.0;
    net.parameters()[1] = 0.25;
    auto batch = random_batch(rng, net, 2);
    const auto with = loss_and_grad_serial<double>(net, batch.examples, Regularization{0.5, 0.0});
    const auto without = loss_and_grad_serial<double>(net, batch.examples, Regularization{0.0, 0.0});
    CHECK(with.grad[0] == without.grad[0]);
    CHECK(with.grad[1] == doctest::Approx(without.grad[1] + 0.5));
    // Biases carry no regularization.
    const auto bias = net.blocks()[1].offset;
    CHECK(with.grad[bias] == without.grad[bias]);
}

TEST_CASE("parallel gradient is bitwise identical to the serial reference")
{
    Rng rng(10);
    const auto net = init_network(rng, 4, 5);
    std::vector<std::vector<float>> inputs, labels;
    std::vector<Example<float>> batch;
    for (int i = 0; i < 16; ++i) {
        inputs.push_back(random_values<float>(rng, net.input_length(), -1.0, 1.0));
        labels.push_back(random_values<float>(rng, 5, -1.0, 1.0));
    }
    for (int i = 0; i < 16; ++i) batch.push_back({inputs[i], labels[i]});
    const auto a = loss_and_grad_serial<float>(net, batch, Regularization{});
    const auto b = loss_and_grad<float>(net, batch, Regularization{});
    CHECK(a.loss == b.loss);
    CHECK(a.grad == b.grad);
}

TEST_CASE("AdamW")
{
    Network<double> net(tiny_arch());
    Rng rng(4);
    randomize(net, rng, 1.0);
    const std::vector<double> before(net.parameters().begin(), net.parameters().end());
    SUBCASE("zero gradient without decay leaves parameters unchanged")
    {
        Hyper h;
        h.weight_decay = 0.0;
        auto st = TrainState<double>::for_model(net, h);
        const std::vector<double> zero(net.parameter_count(), 0.0);
        adamw_step<double>(net, st, zero);
        CHECK(std::equal(before.begin(), before.end(), net.parameters().begin()));
    }
    SUBCASE("decoupled decay on a zero gradient")
    {
        Hyper h;
        h.weight_decay = 0.1;
        h.learning_rate = 0.01;
        auto st = TrainState<double>::for_model(net, h);
        const std::vector<double> zero(net.parameter_count(), 0.0);
        adamw_step<double>(net, st, zero);
        const double decay = 1.0 - 0.01 * 0.1;
        for (std::size_t i = 0; i < before.size(); ++i) CHECK(net.parameters()[i] == before[i] * decay);
    }
    SUBCASE("minimises a quadratic")
    {
        Hyper h;
        h.learning_rate = 0.1;
        h.weight_decay = 0.0;
        auto st = TrainState<double>::for_model(net, h);
        std::vector<double> g(net.parameter_count());
        for (int step = 0; step < 500; ++step) {
            for (std::size_t i = 0; i < g.size(); ++i) g[i] = 2.0 * (net.parameters()[i] - 3.0);
            adamw_step<double>(net, st, g);
        }
        double worst = 0.0;
        for (double w : net.parameters()) worst = std::max(worst, std::abs(w - 3.0));
        CHECK(worst < 1e-3);
    }
}

TEST_CASE("model files")
{
    const auto dir = std::filesystem::temp_directory_path() / "mlao_test_model";
    std::filesystem::create_directories(dir);
    const auto path = dir / "m.bin";
    Rng rng(12);
    const auto scheme = make_scheme(SchemeTag::two_n, {5, 6, 7, 8, 11});
    const auto model = init_model(rng, scheme);
    CHECK(model.input_channels() == 10);
    CHECK(model.n_modes() == 5);
    save_model(path, model);

    SUBCASE("round trip is bitwise")
    {
        const auto back = load_model(path);
        CHECK(back.scheme_tag == model.scheme_tag);
        CHECK(back.corrected_modes == model.corrected_modes);
        CHECK(back.network.architecture() == model.network.architecture());
        CHECK(std::memcmp(back.network.parameters().data(), model.network.parameters().data(),
                          model.network.parameter_count() * sizeof(float)) == 0);
        const auto again = dir / "m2.bin";
        save_model(again, back);
        std::ifstream a(path, std::ios::binary), b(again, std::ios::binary);
        const std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
        CHECK(sa == sb);
    }
    SUBCASE("truncated file is a format error")
    {
        const auto size = std::filesystem::file_size(path);
        for (auto keep : {std::uintmax_t{0}, std::uintmax_t{5}, std::uintmax_t{40}, size - 1}) {
            const auto cut = dir / "cut.bin";
            std::filesystem::copy_file(path, cut, std::filesystem::copy_options::overwrite_existing);
            std::filesystem::resize_file(cut, keep);
            CHECK_THROWS_AS(load_model(cut), FormatError);
        }
    }
    SUBCASE("wrong magic is a format error")
    {
        std::ofstream(dir / "junk.bin") << "not a model file at all";
        CHECK_THROWS_AS(load_model(dir / "junk.bin"), FormatError);
    }
    SUBCASE("mismatched evaluation context is refused")
    {
        const auto nine = make_scheme(SchemeTag::two_n, {5, 6, 7, 8, 9, 10, 11, 12, 13});
        try {
            load_model(path, nine);
            FAIL("expected a mismatch error");
        } catch (const FormatError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("N=5") != std::string::npos);
            CHECK(msg.find("N=9") != std::string::npos);
        }
        CHECK_THROWS_AS(load_model(path, make_scheme(SchemeTag::ast2, {5, 6, 7, 8, 11})), FormatError);
        CHECK_NOTHROW(load_model(path, scheme));
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("forward on a pseudo-PSF stack")
{
    Rng rng(13);
    const auto scheme = make_scheme(SchemeTag::ast2, {5, 6, 7, 8, 11});
    const auto model = init_model(rng, scheme);
    PseudoStack stack;
    stack.scheme_tag = SchemeTag::ast2;
    for (int c = 0; c < 2; ++c) stack.channels.emplace_back(kStackSize, kStackSize, 0.01 * (c + 1));
    const auto out = forward(model, stack);
    CHECK(out.entries().size() == 5);
    const auto flat = stack.flatten();
    const auto raw = model.network.forward(std::vector<float>(flat.begin(), flat.end()));
    CHECK(out[5] == doctest::Approx(raw[0]));
    CHECK(out[11] == doctest::Approx(raw[4]));
    PseudoStack wrong = stack;
    wrong.channels.pop_back();
    CHECK_THROWS(forward(model, wrong));
}
