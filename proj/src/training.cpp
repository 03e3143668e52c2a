#include "mlao/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>

#include "mlao/binary_io.hpp"
#include "mlao/simulation.hpp"

namespace mlao {

namespace {

constexpr char kDatasetMagic[8] = {'M', 'L', 'A', 'O', 'D', 'A', 'T', '1'};
constexpr std::uint32_t kDatasetVersion = 1;

double draw_field(Rng& rng, double lo, double hi)
{
    if (hi <= 0.0) return 0.0;
    if (lo <= 0.0) return std::uniform_real_distribution<double>(0.0, hi)(rng);
    return std::exp(std::uniform_real_distribution<double>(std::log(lo), std::log(hi))(rng));
}

const std::vector<Frame>& specimen_pool(const std::string& dir, int size)
{
    static std::mutex mutex;
    static std::map<std::pair<std::string, int>, std::vector<Frame>> cache;
    std::lock_guard lock(mutex);
    auto key = std::make_pair(dir, size);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, import_specimens(dir, size)).first;
    return it->second;
}

void write_header(std::ostream& out, const DatasetSpec& spec, std::uint64_t count)
{
    out.write(kDatasetMagic, sizeof kDatasetMagic);
    binary::put_u32(out, kDatasetVersion);
    binary::put_string(out, spec.serialize());
    binary::put_u64(out, count);
}

void write_record(std::ostream& out, const Record& r)
{
    const std::size_t n = 1 + r.label.size() + r.psi.size() + r.xi.size() + r.input.size();
    binary::put_u32(out, static_cast<std::uint32_t>(n));
    binary::put_f32(out, r.sampling_factor);
    for (const auto* v : {&r.label, &r.psi, &r.xi, &r.input})
        for (float x : *v) binary::put_f32(out, x);
}

std::uint64_t read_header(std::istream& in, DatasetSpec& spec, const std::string& name)
{
    char magic[8];
    binary::read_exact(in, magic, 8, "dataset magic");
    if (!std::equal(magic, magic + 8, kDatasetMagic)) throw FormatError(name + " is not a dataset file");
    if (binary::get_u32(in, "dataset version") != kDatasetVersion) throw FormatError("unsupported dataset version");
    const auto text = binary::get_string(in, "dataset header");
    try {
        const auto cfg = KeyValueConfig::parse(text);
        spec = DatasetSpec::from_config(cfg);
        if (!cfg.unused_keys().empty()) throw FormatError("dataset header has unknown key '" + cfg.unused_keys().front() + "'");
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("dataset header is invalid: ") + e.what());
    }
    return binary::get_u64(in, "sample count");
}

template <typename Fill>
void generate_to_file(const DatasetSpec& spec, const std::filesystem::path& path, Fill fill)
{
    spec.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_header(out, spec, spec.n_samples);
    constexpr std::size_t chunk = 256;
    std::vector<Record> buffer;
    for (std::size_t start = 0; start < spec.n_samples; start += chunk) {
        const std::size_t n = std::min(chunk, spec.n_samples - start);
        buffer.assign(n, Record{});
        fill(start, buffer);
        for (const auto& r : buffer) write_record(out, r);
        if (!out) throw std::runtime_error("failed writing " + path.string());
    }
}

void fill_serial(const DatasetSpec& spec, std::size_t start, std::vector<Record>& buffer)
{
    for (std::size_t i = 0; i < buffer.size(); ++i) buffer[i] = to_record(generate_sample(spec, start + i), spec);
}

void fill_parallel(const DatasetSpec& spec, std::size_t start, std::vector<Record>& buffer)
{
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(buffer.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) buffer[i] = to_record(generate_sample(spec, start + i), spec);
}

std::vector<std::string> noise_keys() { return {"poisson", "gaussian", "pink", "structured", "background"}; }

double& noise_field(NoiseConfig& c, const std::string& key)
{
    if (key == "poisson") return c.poisson_peak_counts;
    if (key == "gaussian") return c.gaussian_sigma;
    if (key == "pink") return c.pink_amplitude;
    if (key == "structured") return c.structured_amplitude;
    return c.background_offset;
}

} // namespace

NoiseConfig NoiseRange::draw(Rng& rng) const
{
    NoiseConfig c;
    c.poisson_peak_counts = draw_field(rng, lo.poisson_peak_counts, hi.poisson_peak_counts);
    c.gaussian_sigma = draw_field(rng, lo.gaussian_sigma, hi.gaussian_sigma);
    c.pink_amplitude = draw_field(rng, lo.pink_amplitude, hi.pink_amplitude);
    c.structured_amplitude = draw_field(rng, lo.structured_amplitude, hi.structured_amplitude);
    c.background_offset = draw_field(rng, lo.background_offset, hi.background_offset);
    return c;
}

void NoiseRange::validate() const
{
    require(lo.valid() && hi.valid(), "noise bounds must be non-negative");
    for (const auto& k : noise_keys()) {
        NoiseConfig a = lo, b = hi;
        require(noise_field(a, k) <= noise_field(b, k), "noise bound " + k + ": lower bound exceeds upper bound");
    }
}

NoiseRange DatasetSpec::default_noise()
{
    NoiseRange r;
    r.lo.poisson_peak_counts = 300.0;
    r.hi.poisson_peak_counts = 30000.0;
    r.hi.gaussian_sigma = 0.002;
    r.hi.pink_amplitude = 0.002;
    r.hi.structured_amplitude = 0.002;
    r.hi.background_offset = 0.02;
    return r;
}

std::vector<int> DatasetSpec::effective_xi_modes() const
{
    if (!xi_modes.empty()) return xi_modes;
    std::vector<int> out;
    for (int j = 14; j <= 21; ++j)
        if (std::find(corrected_modes.begin(), corrected_modes.end(), j) == corrected_modes.end()) out.push_back(j);
    return out;
}

void DatasetSpec::validate() const
{
    require(grid_size >= 64 && (grid_size & (grid_size - 1)) == 0, "grid_size must be a power of two >= 64");
    require(sampling_lo >= 0.5 && sampling_hi <= 2.0 && sampling_lo <= sampling_hi,
            "sampling factor range must lie within [0.5, 2.0] with lo <= hi");
    require(!corrected_modes.empty(), "corrected_modes must not be empty");
    for (int m : corrected_modes) require(m >= 2, "corrected modes must be Noll indices >= 2");
    require(max_norm >= 0.0, "max_norm must be >= 0");
    require(label_jitter_sigma >= 0.0, "label_jitter_sigma must be >= 0");
    require(xi_range >= 0.0, "xi_range must be >= 0");
    for (int m : effective_xi_modes()) require(m >= 2, "xi modes must be Noll indices >= 2");
    require(imported_fraction >= 0.0 && imported_fraction <= 1.0, "imported_fraction must lie in [0, 1]");
    require(epsilon > 0.0, "epsilon must be positive");
    noise.validate();
}

KeyValueConfig DatasetSpec::to_config() const
{
    KeyValueConfig c;
    c.set("n_samples", std::to_string(n_samples));
    c.set("modality", to_string(modality));
    c.set("grid_size", std::to_string(grid_size));
    c.set("sampling_lo", format_double(sampling_lo));
    c.set("sampling_hi", format_double(sampling_hi));
    c.set("scheme", to_string(scheme_tag));
    c.set("corrected_modes", format_mode_list(corrected_modes));
    c.set("max_norm", format_double(max_norm));
    c.set("label_jitter_sigma", format_double(label_jitter_sigma));
    c.set("xi_modes", format_mode_list(effective_xi_modes()));
    c.set("xi_range", format_double(xi_range));
    for (const auto& k : noise_keys()) {
        NoiseConfig a = noise.lo, b = noise.hi;
        c.set("noise." + k + "_lo", format_double(noise_field(a, k)));
        c.set("noise." + k + "_hi", format_double(noise_field(b, k)));
    }
    c.set("specimen", to_string(specimen));
    c.set("specimen_dir", specimen_dir);
    c.set("imported_fraction", format_double(imported_fraction));
    c.set("epsilon", format_double(epsilon));
    c.set("seed", std::to_string(seed));
    return c;
}

DatasetSpec DatasetSpec::from_config(const KeyValueConfig& c)
{
    DatasetSpec s;
    const auto n = c.get_int("n_samples", static_cast<long long>(s.n_samples));
    require(n >= 0, "n_samples must be >= 0");
    s.n_samples = static_cast<std::size_t>(n);
    s.modality = modality_from_string(c.get_string("modality", to_string(s.modality)));
    s.grid_size = static_cast<int>(c.get_int("grid_size", s.grid_size));
    s.sampling_lo = c.get_double("sampling_lo", s.sampling_lo);
    s.sampling_hi = c.get_double("sampling_hi", s.sampling_hi);
    s.scheme_tag = scheme_tag_from_string(c.get_string("scheme", to_string(s.scheme_tag)));
    s.corrected_modes = parse_mode_list(c.get_string("corrected_modes", format_mode_list(s.corrected_modes)));
    s.max_norm = c.get_double("max_norm", s.max_norm);
    s.label_jitter_sigma = c.get_double("label_jitter_sigma", s.label_jitter_sigma);
    if (c.has("xi_modes")) s.xi_modes = parse_mode_list(c.get_string("xi_modes", ""));
    s.xi_range = c.get_double("xi_range", s.xi_range);
    for (const auto& k : noise_keys()) {
        noise_field(s.noise.lo, k) = c.get_double("noise." + k + "_lo", noise_field(s.noise.lo, k));
        noise_field(s.noise.hi, k) = c.get_double("noise." + k + "_hi", noise_field(s.noise.hi, k));
    }
    s.specimen = specimen_kind_from_string(c.get_string("specimen", to_string(s.specimen)));
    s.specimen_dir = c.get_string("specimen_dir", s.specimen_dir);
    s.imported_fraction = c.get_double("imported_fraction", s.imported_fraction);
    s.epsilon = c.get_double("epsilon", s.epsilon);
    s.seed = c.get_u64("seed", s.seed);
    s.validate();
    return s;
}

Sample generate_sample(Rng& rng, const DatasetSpec& spec)
{
    const auto scheme = spec.scheme();
    const auto xi_modes = spec.effective_xi_modes();
    Sample s;
    s.sampling_factor = std::uniform_real_distribution<double>(spec.sampling_lo, spec.sampling_hi)(rng);

    Frame specimen;
    bool imported = false;
    if (!spec.specimen_dir.empty()) {
        const auto& pool = specimen_pool(spec.specimen_dir, spec.grid_size);
        const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        if (!pool.empty() && u < spec.imported_fraction) {
            specimen = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
            imported = true;
        }
    }
    if (!imported) specimen = synth_specimen(rng, spec.specimen, spec.grid_size);
    specimen = augment(rng, specimen);
    if (!(specimen.max() > 0.0)) specimen = synth_specimen(rng, SpecimenKind::dots, spec.grid_size);

    s.psi = sample_aberration(rng, spec.max_norm, spec.corrected_modes);
    s.psi.correctable_set = spec.corrected_modes;
    if (spec.xi_range > 0.0) {
        std::uniform_real_distribution<double> u(-spec.xi_range, spec.xi_range);
        for (int m : xi_modes) s.xi.set(m, u(rng));
    }
    s.noise = spec.noise.draw(rng);

    const auto biases = scheme.biases();
    std::vector<int> bias_modes = scheme.bias_modes;
    const OpticalSystem system(spec.grid_size, s.sampling_factor, spec.modality,
                               merge_modes({spec.corrected_modes, bias_modes, xi_modes}));
    const ImageFormer former(specimen);
    const ZernikeVector base = s.psi + s.xi;
    std::vector<Frame> images;
    images.reserve(biases.size());
    for (const auto& b : biases) {
        Frame img = former.form(system.render(base + b));
        images.push_back(s.noise.is_zero() ? std::move(img) : add_noise(rng, img, s.noise));
    }
    s.stack = build_input_stack(images, scheme, spec.epsilon);

    std::normal_distribution<double> jitter(0.0, spec.label_jitter_sigma);
    for (int m : spec.corrected_modes) s.label.set(m, -s.psi[m] + (spec.label_jitter_sigma > 0.0 ? jitter(rng) : 0.0));
    s.label.correctable_set = spec.corrected_modes;
    return s;
}

Sample generate_sample(const DatasetSpec& spec, std::uint64_t index)
{
    Rng rng = make_stream(spec.seed, index);
    return generate_sample(rng, spec);
}

Record to_record(const Sample& s, const DatasetSpec& spec)
{
    Record r;
    r.sampling_factor = static_cast<float>(s.sampling_factor);
    for (int m : spec.corrected_modes) {
        r.label.push_back(static_cast<float>(s.label[m]));
        r.psi.push_back(static_cast<float>(s.psi[m]));
    }
    for (int m : spec.effective_xi_modes()) r.xi.push_back(static_cast<float>(s.xi[m]));
    const auto flat = s.stack.flatten();
    r.input.assign(flat.begin(), flat.end());
    return r;
}

void generate_dataset(const DatasetSpec& spec, const std::filesystem::path& path)
{
    generate_to_file(spec, path, [&](std::size_t start, std::vector<Record>& b) { fill_parallel(spec, start, b); });
}

void generate_dataset_serial(const DatasetSpec& spec, const std::filesystem::path& path)
{
    generate_to_file(spec, path, [&](std::size_t start, std::vector<Record>& b) { fill_serial(spec, start, b); });
}

Dataset generate_dataset(const DatasetSpec& spec)
{
    spec.validate();
    Dataset d{spec, std::vector<Record>(spec.n_samples)};
    fill_parallel(spec, 0, d.records);
    return d;
}

Dataset generate_dataset_serial(const DatasetSpec& spec)
{
    spec.validate();
    Dataset d{spec, std::vector<Record>(spec.n_samples)};
    fill_serial(spec, 0, d.records);
    return d;
}

void write_dataset(const Dataset& data, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_header(out, data.spec, data.records.size());
    for (const auto& r : data.records) write_record(out, r);
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

DatasetSpec read_dataset_header(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open dataset " + path.string());
    DatasetSpec spec;
    read_header(in, spec, path.string());
    return spec;
}

Dataset read_dataset(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open dataset " + path.string());
    Dataset d;
    const auto count = read_header(in, d.spec, path.string());
    const std::size_t n_modes = d.spec.corrected_modes.size();
    const std::size_t n_xi = d.spec.effective_xi_modes().size();
    const std::size_t n_input = static_cast<std::size_t>(d.spec.scheme().images_per_cycle()) * kStackSize * kStackSize;
    const std::size_t expected = 1 + 2 * n_modes + n_xi + n_input;
    if (count > (std::uint64_t{1} << 32)) throw FormatError("dataset sample count is implausible");
    d.records.resize(static_cast<std::size_t>(count));
    std::vector<char> buf(expected * 4);
    for (auto& r : d.records) {
        if (binary::get_u32(in, "sample length") != expected) throw FormatError("dataset sample has the wrong length");
        binary::read_exact(in, buf.data(), buf.size(), "sample payload");
        std::vector<float> v(expected);
        for (std::size_t i = 0; i < expected; ++i) {
            std::uint32_t u = 0;
            for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[4 * i + b])) << (8 * b);
            v[i] = std::bit_cast<float>(u);
        }
        auto it = v.begin();
        r.sampling_factor = *it++;
        r.label.assign(it, it + n_modes);
        it += n_modes;
        r.psi.assign(it, it + n_modes);
        it += n_modes;
        r.xi.assign(it, it + n_xi);
        it += n_xi;
        r.input.assign(it, v.end());
    }
    return d;
}

Dataset read_dataset(const std::filesystem::path& path, const CorrectionScheme& expected)
{
    const auto header = read_dataset_header(path);
    if (header.scheme_tag != expected.tag)
        throw FormatError("dataset was generated for scheme " + to_string(header.scheme_tag) + ", not " +
                          to_string(expected.tag));
    if (header.corrected_modes != expected.corrected_modes)
        throw FormatError("dataset corrects modes " + format_mode_list(header.corrected_modes) + ", not " +
                          format_mode_list(expected.corrected_modes));
    return read_dataset(path);
}

double validation_loss(const NetworkModel& model, const Dataset& data, std::size_t begin, std::size_t end)
{
    require(begin <= end && end <= data.records.size(), "validation range out of bounds");
    if (begin == end) return 0.0;
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(end - begin);
    std::vector<double> sq(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto& r = data.records[begin + static_cast<std::size_t>(i)];
        const auto out = model.network.forward(r.input);
        double s = 0.0;
        for (std::size_t j = 0; j < out.size(); ++j) {
            const double e = static_cast<double>(out[j]) - r.label[j];
            s += e * e;
        }
        sq[static_cast<std::size_t>(i)] = s;
    }
    return std::sqrt(std::accumulate(sq.begin(), sq.end(), 0.0) / (static_cast<double>(n) * model.n_modes()));
}

TrainResult train(NetworkModel& model, const Dataset& data, const TrainConfig& cfg, const EpochCallback& on_epoch)
{
    const auto scheme = data.spec.scheme();
    require(model.input_channels() == scheme.images_per_cycle(),
            "model expects " + std::to_string(model.input_channels()) + " input channels but the dataset has " +
                std::to_string(scheme.images_per_cycle()));
    require(model.n_modes() == scheme.n_modes(), "model predicts " + std::to_string(model.n_modes()) +
                                                     " modes but the dataset labels " + std::to_string(scheme.n_modes()));
    require(model.corrected_modes == scheme.corrected_modes, "model and dataset correct different modes");
    require(model.scheme_tag == scheme.tag, "model and dataset use different schemes");
    require(cfg.epochs >= 0, "epochs must be >= 0");
    require(cfg.validation_fraction >= 0.0 && cfg.validation_fraction < 1.0, "validation fraction must lie in [0, 1)");
    require(cfg.hyper.batch_size >= 1, "batch size must be >= 1");

    const std::size_t total = data.records.size();
    const std::size_t n_val = static_cast<std::size_t>(std::floor(static_cast<double>(total) * cfg.validation_fraction));
    const std::size_t n_train = total - n_val;
    TrainResult result;
    result.initial_validation = validation_loss(model, data, n_train, total);
    if (cfg.epochs == 0) return result;
    require(n_train > 0, "no training samples");

    std::vector<Example<float>> examples;
    examples.reserve(n_train);
    for (std::size_t i = 0; i < n_train; ++i) examples.push_back({data.records[i].input, data.records[i].label});

    auto state = TrainState<float>::for_model(model.network, cfg.hyper);
    const auto reg = cfg.hyper.regularization();
    Rng rng = make_stream(cfg.seed, 0x5348554646ULL);
    std::vector<std::size_t> order(n_train);
    std::vector<Example<float>> batch;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n_train; start += static_cast<std::size_t>(cfg.hyper.batch_size)) {
            const std::size_t end = std::min(n_train, start + static_cast<std::size_t>(cfg.hyper.batch_size));
            batch.clear();
            for (std::size_t i = start; i < end; ++i) batch.push_back(examples[order[i]]);
            const auto lg = cfg.parallel ? loss_and_grad(model.network, std::span<const Example<float>>(batch), reg)
                                         : loss_and_grad_serial(model.network, std::span<const Example<float>>(batch), reg);
            adamw_step(model.network, state, std::span<const float>(lg.grad));
            loss_sum += lg.data_loss;
            ++batches;
        }
        EpochLoss e{epoch, loss_sum / static_cast<double>(batches), validation_loss(model, data, n_train, total)};
        result.history.push_back(e);
        if (on_epoch) on_epoch(e);
    }
    return result;
}

std::vector<BinStats> Evaluation::binned(const std::vector<RmsBin>& bins) const
{
    std::vector<BinStats> out;
    for (const auto& b : bins) {
        std::vector<double> in, res;
        for (std::size_t i = 0; i < input_rms.size(); ++i) {
            if (input_rms[i] >= b.lo && input_rms[i] < b.hi) {
                in.push_back(input_rms[i]);
                res.push_back(residual_rms[i]);
            }
        }
        out.push_back({b, in.size(), mean(in), sample_sd(in), mean(res), sample_sd(res)});
    }
    return out;
}

Predictor network_predictor(const NetworkModel& model)
{
    return [model](const Record& r) {
        const auto out = model.network.forward(r.input);
        std::vector<double> v(out.begin(), out.end());
        return ZernikeVector::from_values(model.corrected_modes, v);
    };
}

Predictor zero_predictor()
{
    return [](const Record&) { return ZernikeVector{}; };
}

Predictor oracle_predictor(std::vector<int> modes)
{
    return [modes = std::move(modes)](const Record& r) {
        std::vector<double> v(r.psi.begin(), r.psi.end());
        for (auto& x : v) x = -x;
        return ZernikeVector::from_values(modes, v);
    };
}

namespace {

Evaluation evaluate_impl(const Predictor& predictor, const Dataset& data, bool parallel)
{
    const auto& modes = data.spec.corrected_modes;
    Evaluation e;
    const std::size_t n = data.records.size();
    e.input_rms.resize(n);
    e.residual_rms.resize(n);
    const std::ptrdiff_t sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 8) if (parallel)
    for (std::ptrdiff_t i = 0; i < sn; ++i) {
        const auto& r = data.records[static_cast<std::size_t>(i)];
        std::vector<double> psi(r.psi.begin(), r.psi.end());
        const auto truth = ZernikeVector::from_values(modes, psi);
        e.input_rms[static_cast<std::size_t>(i)] = rms(truth);
        e.residual_rms[static_cast<std::size_t>(i)] = rms(truth + predictor(r));
    }
    e.input_mean = mean(e.input_rms);
    e.residual_mean = mean(e.residual_rms);
    e.residual_sd = sample_sd(e.residual_rms);
    return e;
}

} // namespace

Evaluation evaluate(const Predictor& predictor, const Dataset& data) { return evaluate_impl(predictor, data, true); }

Evaluation evaluate_serial(const Predictor& predictor, const Dataset& data) { return evaluate_impl(predictor, data, false); }

Evaluation evaluate(const NetworkModel& model, const Dataset& data)
{
    const auto scheme = data.spec.scheme();
    require(model.input_channels() == scheme.images_per_cycle() && model.n_modes() == scheme.n_modes(),
            "model does not match the test set scheme");
    return evaluate(network_predictor(model), data);
}

std::vector<SweepRow> sampling_sweep(const NetworkModel& model, const DatasetSpec& test_spec,
                                     const std::vector<double>& factors)
{
    for (double f : factors) require(f >= 0.5 && f <= 2.0, "sampling factors must lie within [0.5, 2.0]");
    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        DatasetSpec s = test_spec;
        s.sampling_lo = s.sampling_hi = factors[i];
        const auto data = generate_dataset(s);
        const auto e = evaluate(model, data);
        rows.push_back({factors[i], data.size(), e.input_mean, e.residual_mean, e.residual_sd});
    }
    return rows;
}

double mean(std::span<const double> v)
{
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v)
{
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

} // namespace mlao
