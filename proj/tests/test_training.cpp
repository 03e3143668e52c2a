#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "mlao/training.hpp"

using namespace mlao;

namespace {

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

DatasetSpec small_spec(std::size_t n, SchemeTag tag = SchemeTag::ast2)
{
    DatasetSpec s;
    s.n_samples = n;
    s.grid_size = 64;
    s.scheme_tag = tag;
    s.seed = 31;
    return s;
}

double ks_uniform(std::vector<double> samples, double lo, double hi)
{
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double cdf = (samples[i] - lo) / (hi - lo);
        d = std::max({d, (i + 1) / n - cdf, cdf - i / n});
    }
    return d;
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const char* name) : path(std::filesystem::temp_directory_path() / name)
    {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

} // namespace

TEST_CASE("unaberrated noiseless sample gives channels peaked at the origin")
{
    DatasetSpec spec = small_spec(1);
    spec.max_norm = 0.0;
    spec.xi_range = 0.0;
    spec.noise = NoiseRange{};
    spec.specimen = SpecimenKind::dots;
    Rng rng(4);
    const auto s = generate_sample(rng, spec);
    REQUIRE(s.stack.channel_count() == 2);
    // The two images coincide, but the regularized ratio is only close to 1
    // where the image spectrum is strong, so the impulse is low-passed.
    for (const auto& ch : s.stack.channels) {
        const auto px = ch.pixels();
        const auto peak = std::max_element(px.begin(), px.end()) - px.begin();
        CHECK(peak == 16 * 32 + 16);
    }
    CHECK(rms(s.psi) == 0.0);
    for (int m : spec.corrected_modes) CHECK(std::abs(s.label[m]) < 5.0 * spec.label_jitter_sigma);
}

TEST_CASE("samples are reproducible")
{
    const auto spec = small_spec(4);
    const auto a = generate_sample(spec, 2);
    const auto b = generate_sample(spec, 2);
    CHECK(a.label == b.label);
    CHECK(a.psi == b.psi);
    CHECK(a.stack.flatten() == b.stack.flatten());
    const auto c = generate_sample(spec, 3);
    CHECK_FALSE(a.psi == c.psi);
}

TEST_CASE("label is the jittered negative aberration")
{
    auto spec = small_spec(1);
    spec.label_jitter_sigma = 0.0;
    const auto s = generate_sample(spec, 0);
    for (int m : spec.corrected_modes) CHECK(s.label[m] == -s.psi[m]);
    CHECK(s.xi.entries().size() == spec.effective_xi_modes().size());
    for (const auto& [m, v] : s.xi.entries()) {
        CHECK(std::find(spec.corrected_modes.begin(), spec.corrected_modes.end(), m) == spec.corrected_modes.end());
        CHECK(std::abs(v) <= spec.xi_range);
    }
}

TEST_CASE("aberration norm is uniform over the sampling range")
{
    auto spec = small_spec(1000);
    spec.noise = NoiseRange{};
    std::vector<double> norms;
    for (std::size_t i = 0; i < 1000; ++i) {
        Rng rng = make_stream(spec.seed, i);
        norms.push_back(rms(generate_sample(rng, spec).psi));
    }
    CHECK(ks_uniform(norms, 0.0, spec.max_norm) < 0.05);
}

TEST_CASE("default xi modes exclude the corrected set")
{
    DatasetSpec s;
    const auto xi = s.effective_xi_modes();
    CHECK(xi == std::vector<int>{14, 15, 16, 17, 18, 19, 20, 21});
    s.corrected_modes = {5, 6, 14};
    CHECK(s.effective_xi_modes() == std::vector<int>{15, 16, 17, 18, 19, 20, 21});
}

TEST_CASE("dataset files")
{
    TempDir tmp("mlao_test_dataset");
    auto spec = small_spec(100);
    const auto a = tmp.path / "a.bin";
    const auto b = tmp.path / "b.bin";
    const auto c = tmp.path / "c.bin";
    generate_dataset(spec, a);
    generate_dataset(spec, b);
    generate_dataset_serial(spec, c);

    SUBCASE("regeneration and the serial path are byte-identical")
    {
        CHECK(slurp(a) == slurp(b));
        CHECK(slurp(a) == slurp(c));
    }
    SUBCASE("all samples read back and the header round-trips")
    {
        const auto d = read_dataset(a);
        CHECK(d.size() == 100);
        CHECK(d.spec.serialize() == spec.serialize());
        CHECK(read_dataset_header(a).serialize() == spec.serialize());
        const auto r0 = to_record(generate_sample(spec, 0), spec);
        CHECK(d.records[0].label == r0.label);
        CHECK(d.records[0].input == r0.input);
        CHECK(d.records[0].input.size() == 2u * 32 * 32);
        CHECK(d.records[0].psi.size() == 5);
        CHECK(d.records[0].xi.size() == spec.effective_xi_modes().size());
    }
    SUBCASE("in-memory generation matches the file")
    {
        const auto mem = generate_dataset(spec);
        const auto d = read_dataset(a);
        REQUIRE(mem.size() == d.size());
        for (std::size_t i = 0; i < d.size(); ++i) CHECK(mem.records[i].input == d.records[i].input);
        write_dataset(mem, tmp.path / "w.bin");
        CHECK(slurp(tmp.path / "w.bin") == slurp(a));
    }
    SUBCASE("reader rejects another scheme")
    {
        CHECK_THROWS_AS(read_dataset(a, make_scheme(SchemeTag::two_n, spec.corrected_modes)), FormatError);
        CHECK_THROWS_AS(read_dataset(a, make_scheme(SchemeTag::ast2, {5, 6, 7})), FormatError);
        CHECK_NOTHROW(read_dataset(a, spec.scheme()));
    }
    SUBCASE("truncation is a format error")
    {
        std::filesystem::copy_file(a, tmp.path / "t.bin");
        std::filesystem::resize_file(tmp.path / "t.bin", std::filesystem::file_size(a) - 7);
        CHECK_THROWS_AS(read_dataset(tmp.path / "t.bin"), FormatError);
    }
}

TEST_CASE("dataset configuration")
{
    auto spec = small_spec(10);
    spec.noise.hi.poisson_peak_counts = 5000;
    spec.xi_modes = {22, 23};
    const auto back = DatasetSpec::from_config(spec.to_config());
    CHECK(back.serialize() == spec.serialize());
    CHECK_THROWS(DatasetSpec::from_config(KeyValueConfig::parse("grid_size = 100\n")));
    CHECK_THROWS(DatasetSpec::from_config(KeyValueConfig::parse("sampling_lo = 1.3\nsampling_hi = 1.1\n")));
    CHECK_THROWS(DatasetSpec::from_config(KeyValueConfig::parse("scheme = 3n\n")));
}

TEST_CASE("training")
{
    auto spec = small_spec(96);
    const auto data = generate_dataset(spec);
    TrainConfig tc;
    tc.hyper.batch_size = 16;
    tc.seed = 3;

    SUBCASE("zero epochs leave the model unchanged")
    {
        Rng rng(1);
        auto model = init_model(rng, spec.scheme());
        const auto before = model;
        tc.epochs = 0;
        const auto r = train(model, data, tc);
        CHECK(r.history.empty());
        CHECK(std::equal(before.network.parameters().begin(), before.network.parameters().end(),
                         model.network.parameters().begin()));
    }
    SUBCASE("same seed gives the same history and weights")
    {
        tc.epochs = 2;
        Rng r1(1), r2(1);
        auto m1 = init_model(r1, spec.scheme());
        auto m2 = init_model(r2, spec.scheme());
        const auto h1 = train(m1, data, tc);
        const auto h2 = train(m2, data, tc);
        REQUIRE(h1.history.size() == 2);
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(h1.history[i].train == h2.history[i].train);
            CHECK(h1.history[i].validation == h2.history[i].validation);
        }
        CHECK(std::equal(m1.network.parameters().begin(), m1.network.parameters().end(), m2.network.parameters().begin()));
    }
    SUBCASE("serial and parallel gradients train identically")
    {
        tc.epochs = 1;
        Rng r1(1), r2(1);
        auto m1 = init_model(r1, spec.scheme());
        auto m2 = init_model(r2, spec.scheme());
        train(m1, data, tc);
        tc.parallel = false;
        train(m2, data, tc);
        CHECK(std::equal(m1.network.parameters().begin(), m1.network.parameters().end(), m2.network.parameters().begin()));
    }
    SUBCASE("model must match the dataset scheme")
    {
        Rng rng(1);
        auto model = init_model(rng, make_scheme(SchemeTag::two_n, spec.corrected_modes));
        CHECK_THROWS(train(model, data, tc));
    }
}

TEST_CASE("evaluation baselines")
{
    const auto spec = small_spec(40);
    const auto data = generate_dataset(spec);
    const auto oracle = evaluate(oracle_predictor(spec.corrected_modes), data);
    for (double r : oracle.residual_rms) CHECK(r == 0.0);
    const auto zero = evaluate(zero_predictor(), data);
    for (std::size_t i = 0; i < data.size(); ++i) CHECK(zero.residual_rms[i] == zero.input_rms[i]);
    CHECK(zero.residual_mean == zero.input_mean);

    Rng rng(8);
    const auto net = network_predictor(init_model(rng, spec.scheme()));
    const auto par = evaluate(net, data);
    const auto ser = evaluate_serial(net, data);
    CHECK(par.residual_rms == ser.residual_rms);
    CHECK(par.residual_mean == ser.residual_mean);

    const auto bins = zero.binned({{0.0, 1.0}, {1.0, 2.6}});
    REQUIRE(bins.size() == 2);
    CHECK(bins[0].count + bins[1].count == data.size());
    for (const auto& b : bins) CHECK(b.residual_mean == b.input_mean);
}

TEST_CASE("sampling sweep")
{
    Rng rng(2);
    const auto spec = small_spec(8);
    const auto model = init_model(rng, spec.scheme());
    CHECK(sampling_sweep(model, spec, {}).empty());
    const auto rows = sampling_sweep(model, spec, {0.8, 1.4});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].factor == 0.8);
    CHECK(rows[1].count == 8);
    CHECK(std::isfinite(rows[1].residual_mean));
}

TEST_CASE("summary statistics")
{
    const std::vector<double> v{1.0, 2.0, 4.0};
    CHECK(mean(v) == doctest::Approx(7.0 / 3.0));
    CHECK(sample_sd(v) == doctest::Approx(std::sqrt(((1 - 7.0 / 3) * (1 - 7.0 / 3) + (2 - 7.0 / 3) * (2 - 7.0 / 3) + (4 - 7.0 / 3) * (4 - 7.0 / 3)) / 2.0)));
    CHECK(mean(std::vector<double>{}) == 0.0);
}

TEST_CASE("label closes the loop on noiseless samples")
{
    auto spec = small_spec(1);
    spec.noise = NoiseRange{};
    spec.xi_range = 0.0;
    for (std::uint64_t i = 0; i < 20; ++i) {
        const auto s = generate_sample(spec, i);
        CHECK(rms(s.psi + s.label) <= spec.label_jitter_sigma * std::sqrt(5.0) * 3.0);
    }
}

TEST_CASE("desk-scale training reduces the validation loss")
{
    DatasetSpec spec;
    spec.n_samples = 2000;
    spec.scheme_tag = SchemeTag::two_n;
    spec.seed = 21;
    const auto data = generate_dataset(spec);
    Rng rng(1);
    auto model = init_model(rng, spec.scheme());
    TrainConfig tc;
    tc.epochs = 30;
    const auto r = train(model, data, tc);
    REQUIRE(r.history.size() == 30);
    CHECK(r.history.back().validation < 0.7 * r.initial_validation);
}
