#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mlao/analysis.hpp"
#include "mlao/config.hpp"
#include "mlao/image_io.hpp"
#include "mlao/microscope.hpp"
#include "mlao/training.hpp"

namespace fs = std::filesystem;
using namespace mlao;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Everything a run can be configured with. One file may carry all sections;
// every command reads all of them so that a typo anywhere is reported.
struct Settings {
    DatasetSpec dataset;
    MicroscopeConfig microscope;
    std::optional<MetricConfig> metric;
    Hyper hyper;
    int epochs = 30;
    double validation_fraction = 0.1;
    SpecimenKind compare_specimen = SpecimenKind::dots;
    double compare_xi_range = 0.0;
    double bias_depth = 1.0;
    KeyValueConfig effective;
};

MetricConfig::Kind metric_kind_from_string(const std::string& s)
{
    if (s == "intensity") return MetricConfig::Kind::intensity;
    if (s == "fourier") return MetricConfig::Kind::fourier;
    if (s == "sharpness") return MetricConfig::Kind::sharpness;
    throw std::invalid_argument("unknown metric kind '" + s + "'");
}

std::string to_string(MetricConfig::Kind k)
{
    switch (k) {
    case MetricConfig::Kind::intensity: return "intensity";
    case MetricConfig::Kind::fourier: return "fourier";
    case MetricConfig::Kind::sharpness: return "sharpness";
    }
    return "?";
}

Settings read_settings(const std::string& config_path)
{
    KeyValueConfig cfg;
    if (!config_path.empty()) {
        if (!fs::exists(config_path)) throw UsageError("config file not found: " + config_path);
        cfg = KeyValueConfig::load(config_path);
    }
    Settings s;
    s.dataset = DatasetSpec::from_config(cfg);

    s.microscope = MicroscopeConfig::noisy();
    auto& mc = s.microscope;
    mc.grid_size = static_cast<int>(cfg.get_int("microscope.grid_size", mc.grid_size));
    mc.sampling_factor = cfg.get_double("microscope.sampling_factor", mc.sampling_factor);
    mc.modality = modality_from_string(cfg.get_string("microscope.modality", mlao::to_string(s.dataset.modality)));
    mc.noise.poisson_peak_counts = cfg.get_double("microscope.poisson", mc.noise.poisson_peak_counts);
    mc.noise.gaussian_sigma = cfg.get_double("microscope.gaussian", mc.noise.gaussian_sigma);
    mc.noise.pink_amplitude = cfg.get_double("microscope.pink", mc.noise.pink_amplitude);
    mc.noise.structured_amplitude = cfg.get_double("microscope.structured", mc.noise.structured_amplitude);
    mc.noise.background_offset = cfg.get_double("microscope.background", mc.noise.background_offset);
    require(mc.noise.valid(), "microscope noise parameters must be non-negative");

    if (cfg.has("metric.kind") || cfg.has("metric.n") || cfg.has("metric.m") || cfg.has("metric.f_max")) {
        MetricConfig m;
        m.kind = metric_kind_from_string(cfg.get_string("metric.kind", "sharpness"));
        m.n = cfg.get_double("metric.n", m.n);
        m.m = cfg.get_double("metric.m", m.m);
        m.f_max = cfg.get_double("metric.f_max", m.f_max);
        m.validate();
        s.metric = m;
    }

    auto& h = s.hyper;
    h.learning_rate = cfg.get_double("train.learning_rate", h.learning_rate);
    h.beta1 = cfg.get_double("train.beta1", h.beta1);
    h.beta2 = cfg.get_double("train.beta2", h.beta2);
    h.weight_decay = cfg.get_double("train.weight_decay", h.weight_decay);
    h.l1 = cfg.get_double("train.l1", h.l1);
    h.l2 = cfg.get_double("train.l2", h.l2);
    h.batch_size = static_cast<int>(cfg.get_int("train.batch_size", h.batch_size));
    s.epochs = static_cast<int>(cfg.get_int("train.epochs", s.epochs));
    s.validation_fraction = cfg.get_double("train.validation_fraction", s.validation_fraction);
    require(h.learning_rate > 0.0, "train.learning_rate must be positive");
    require(h.batch_size > 0, "train.batch_size must be positive");
    require(s.epochs >= 0, "train.epochs must be >= 0");
    require(s.validation_fraction > 0.0 && s.validation_fraction < 1.0, "train.validation_fraction must be in (0, 1)");

    s.compare_specimen = specimen_kind_from_string(cfg.get_string("compare.specimen", mlao::to_string(s.compare_specimen)));
    s.compare_xi_range = cfg.get_double("compare.xi_range", s.compare_xi_range);
    s.bias_depth = cfg.get_double("baseline.bias_depth", s.bias_depth);
    require(s.compare_xi_range >= 0.0, "compare.xi_range must be >= 0");
    require(s.bias_depth > 0.0, "baseline.bias_depth must be positive");

    const auto unknown = cfg.unused_keys();
    if (!unknown.empty()) throw UsageError("unknown config key '" + unknown.front() + "'");
    s.effective = cfg;
    return s;
}

// Full effective configuration, defaults included, for output headers.
KeyValueConfig provenance(const Settings& s, const std::string& command, std::uint64_t seed)
{
    KeyValueConfig out = s.dataset.to_config();
    const auto& mc = s.microscope;
    out.set("command", command);
    out.set("run_seed", std::to_string(seed));
    out.set("microscope.grid_size", std::to_string(mc.grid_size));
    out.set("microscope.sampling_factor", format_double(mc.sampling_factor));
    out.set("microscope.modality", mlao::to_string(mc.modality));
    out.set("microscope.poisson", format_double(mc.noise.poisson_peak_counts));
    out.set("microscope.gaussian", format_double(mc.noise.gaussian_sigma));
    out.set("microscope.pink", format_double(mc.noise.pink_amplitude));
    out.set("microscope.structured", format_double(mc.noise.structured_amplitude));
    out.set("microscope.background", format_double(mc.noise.background_offset));
    if (s.metric) {
        out.set("metric.kind", to_string(s.metric->kind));
        out.set("metric.n", format_double(s.metric->n));
        out.set("metric.m", format_double(s.metric->m));
        out.set("metric.f_max", format_double(s.metric->f_max));
    }
    out.set("train.learning_rate", format_double(s.hyper.learning_rate));
    out.set("train.beta1", format_double(s.hyper.beta1));
    out.set("train.beta2", format_double(s.hyper.beta2));
    out.set("train.weight_decay", format_double(s.hyper.weight_decay));
    out.set("train.l1", format_double(s.hyper.l1));
    out.set("train.l2", format_double(s.hyper.l2));
    out.set("train.batch_size", std::to_string(s.hyper.batch_size));
    out.set("train.epochs", std::to_string(s.epochs));
    out.set("train.validation_fraction", format_double(s.validation_fraction));
    out.set("compare.specimen", mlao::to_string(s.compare_specimen));
    out.set("compare.xi_range", format_double(s.compare_xi_range));
    out.set("baseline.bias_depth", format_double(s.bias_depth));
    return out;
}

void write_provenance(CsvWriter& csv, const KeyValueConfig& prov)
{
    std::istringstream lines(prov.serialize());
    for (std::string line; std::getline(lines, line);)
        if (!line.empty()) csv.comment(line);
}

// Writes via a temporary sibling so that a failed run leaves no partial file.
template <typename Write>
void write_atomically(const fs::path& path, Write write)
{
    fs::path tmp = path;
    tmp += ".partial";
    try {
        write(tmp);
        fs::rename(tmp, path);
    } catch (...) {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw;
    }
}

void write_text_atomically(const fs::path& path, const std::string& text)
{
    write_atomically(path, [&](const fs::path& tmp) {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << text;
        if (!out) throw std::runtime_error("failed writing " + tmp.string());
    });
}

void require_input(const std::string& path, const char* what)
{
    if (path.empty()) throw UsageError(std::string(what) + " path is required");
    if (!fs::exists(path)) throw UsageError(std::string(what) + " not found: " + path);
}

std::vector<RmsBin> parse_bins(const std::string& text)
{
    std::vector<RmsBin> bins;
    std::istringstream in(text);
    for (std::string item; std::getline(in, item, ',');) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw UsageError("bin '" + item + "' must look like lo:hi");
        const auto lo = parse_double_list(item.substr(0, colon));
        const auto hi = parse_double_list(item.substr(colon + 1));
        if (lo.size() != 1 || hi.size() != 1 || !(lo[0] >= 0.0) || !(hi[0] > lo[0]))
            throw UsageError("bin '" + item + "' must satisfy 0 <= lo < hi");
        bins.push_back({lo[0], hi[0]});
    }
    if (bins.empty()) throw UsageError("at least one rms bin is required");
    return bins;
}

BaselineConfig baseline_config(const Settings& s, BaselineConfig::Variant variant, const std::vector<int>& modes)
{
    auto cfg = BaselineConfig::for_modality(variant, modes, s.microscope.modality, s.bias_depth);
    if (s.metric) cfg.metric = *s.metric;
    cfg.validate();
    return cfg;
}

CompareSetup compare_setup(const Settings& s, const std::vector<int>& modes)
{
    CompareSetup setup;
    setup.microscope = s.microscope;
    setup.aberration_modes = modes;
    setup.specimen = s.compare_specimen;
    setup.xi_range = s.compare_xi_range;
    if (setup.xi_range > 0.0) {
        DatasetSpec tmp = s.dataset;
        tmp.corrected_modes = modes;
        setup.xi_modes = tmp.effective_xi_modes();
    }
    return setup;
}

struct Common {
    std::string config;
    std::uint64_t seed = 1;
    bool seed_given = false;
};

void add_common(CLI::App* cmd, Common& c)
{
    cmd->add_option("--config", c.config, "key=value configuration file");
    cmd->add_option("--seed", c.seed, "random seed")->each([&c](const std::string&) { c.seed_given = true; });
}

std::optional<SchemeTag> parse_scheme_flag(const std::string& s)
{
    if (s.empty()) return std::nullopt;
    return scheme_tag_from_string(s);
}

// ---- commands ---------------------------------------------------------------

struct DatagenArgs {
    Common common;
    std::string out;
    std::string scheme;
    std::string modality;
    long long samples = -1;
};

int cmd_datagen(const DatagenArgs& a)
{
    Settings s = read_settings(a.common.config);
    auto& spec = s.dataset;
    if (a.common.seed_given) spec.seed = a.common.seed;
    if (auto tag = parse_scheme_flag(a.scheme)) spec.scheme_tag = *tag;
    if (!a.modality.empty()) spec.modality = modality_from_string(a.modality);
    if (a.samples >= 0) spec.n_samples = static_cast<std::size_t>(a.samples);
    spec.validate();
    write_atomically(a.out, [&](const fs::path& tmp) { generate_dataset(spec, tmp); });
    std::cout << "wrote " << a.out << ": samples=" << spec.n_samples << " scheme=" << mlao::to_string(spec.scheme_tag)
              << " modes=" << format_mode_list(spec.corrected_modes) << " images=" << spec.scheme().images_per_cycle()
              << " seed=" << spec.seed << "\n";
    return 0;
}

struct TrainArgs {
    Common common;
    std::string data;
    std::string out;
    std::string loss_csv;
    std::string scheme;
    int epochs = -1;
    double learning_rate = 0.0;
    int batch_size = 0;
    bool serial = false;
};

int cmd_train(const TrainArgs& a)
{
    Settings s = read_settings(a.common.config);
    require_input(a.data, "dataset");
    const DatasetSpec header = read_dataset_header(a.data);
    if (auto tag = parse_scheme_flag(a.scheme); tag && *tag != header.scheme_tag)
        throw UsageError("dataset was generated for scheme " + mlao::to_string(header.scheme_tag) + " but --scheme is " +
                         mlao::to_string(*tag));
    const Dataset data = read_dataset(a.data);

    TrainConfig tc;
    tc.hyper = s.hyper;
    if (a.learning_rate > 0.0) tc.hyper.learning_rate = a.learning_rate;
    if (a.batch_size > 0) tc.hyper.batch_size = a.batch_size;
    tc.epochs = a.epochs >= 0 ? a.epochs : s.epochs;
    tc.validation_fraction = s.validation_fraction;
    tc.seed = a.common.seed;
    tc.parallel = !a.serial;

    Rng rng = make_stream(a.common.seed, 0x494e4954);
    NetworkModel model = init_model(rng, data.spec.scheme());
    const TrainResult result = train(model, data, tc, [](const EpochLoss& e) {
        std::cout << "epoch " << e.epoch << " train " << format_double(e.train) << " validation "
                  << format_double(e.validation) << "\n";
    });

    std::ostringstream csv_text;
    CsvWriter csv(csv_text);
    auto prov = provenance(s, "train", a.common.seed);
    prov.set("train.epochs", std::to_string(tc.epochs));
    prov.set("train.learning_rate", format_double(tc.hyper.learning_rate));
    prov.set("train.batch_size", std::to_string(tc.hyper.batch_size));
    prov.set("dataset", a.data);
    write_provenance(csv, prov);
    csv.comment("initial_validation=" + format_double(result.initial_validation));
    csv.row({"epoch", "train_loss", "validation_loss"});
    for (const auto& e : result.history)
        csv.row({std::to_string(e.epoch), format_double(e.train), format_double(e.validation)});

    const std::string loss_path = a.loss_csv.empty() ? a.out + ".loss.csv" : a.loss_csv;
    write_atomically(a.out, [&](const fs::path& tmp) { save_model(tmp, model); });
    write_text_atomically(loss_path, csv_text.str());
    std::cout << "wrote " << a.out << " and " << loss_path << "\n";
    return 0;
}

struct CorrectArgs {
    Common common;
    std::string model;
    std::string scheme;
    std::string modality;
    std::string out;
    std::string dump_dir;
    int trials = 1;
    int iterations = 3;
    double rms = 1.5;
    bool oracle = false;
};

int cmd_correct(const CorrectArgs& a)
{
    Settings s = read_settings(a.common.config);
    if (!a.modality.empty()) s.microscope.modality = modality_from_string(a.modality);
    if (a.trials < 1 || a.iterations < 1) throw UsageError("--trials and --iterations must be >= 1");
    if (!(a.rms >= 0.0)) throw UsageError("--rms must be >= 0");

    std::optional<NetworkModel> model;
    std::vector<NamedEstimator> estimators;
    std::vector<int> modes = s.dataset.corrected_modes;
    if (a.oracle) {
        estimators.push_back(oracle_entry());
    } else {
        require_input(a.model, "model");
        model = load_model(a.model);
        modes = model->corrected_modes;
        const SchemeTag tag = a.scheme.empty() ? model->scheme_tag : scheme_tag_from_string(a.scheme);
        const auto scheme = make_scheme(tag, modes);
        model = load_model(a.model, scheme);
        estimators.push_back(mlao_entry(*model, scheme));
    }

    const double half = std::max(1e-6, 0.05 * a.rms);
    const auto report = compare(compare_setup(s, modes), estimators, a.trials, {{std::max(0.0, a.rms - half), a.rms + half}},
                                a.iterations, a.common.seed);

    std::ostringstream text;
    CsvWriter csv(text);
    write_provenance(csv, provenance(s, "correct", a.common.seed));
    write_trajectory_csv(text, report.rows);
    write_text_atomically(a.out, text.str());

    if (!a.dump_dir.empty()) {
        fs::create_directories(a.dump_dir);
        Rng rng = make_stream(a.common.seed, 0x44554d50);
        const Frame specimen = synth_specimen(rng, s.compare_specimen, s.microscope.grid_size);
        write_pgm16(fs::path(a.dump_dir) / "specimen.pgm", specimen, 1.0);
    }
    std::cout << "wrote " << a.out << ": " << report.rows.size() << " rows\n";
    return 0;
}

struct CompareArgs {
    Common common;
    std::vector<std::string> models;
    std::string modality;
    std::string out;
    std::string trajectory;
    std::string bins = "0:0.6,0.6:1.2,1.2:1.8,1.8:2.4";
    int trials = 20;
    int iterations = 1;
    bool conv_2n1 = false;
    bool conv_3n = false;
    bool zero = false;
    bool oracle = false;
};

int cmd_compare(const CompareArgs& a)
{
    Settings s = read_settings(a.common.config);
    if (!a.modality.empty()) s.microscope.modality = modality_from_string(a.modality);
    if (a.trials < 1 || a.iterations < 1) throw UsageError("--trials and --iterations must be >= 1");
    const auto bins = parse_bins(a.bins);

    std::vector<NetworkModel> models;
    models.reserve(a.models.size());
    std::vector<int> modes = s.dataset.corrected_modes;
    for (const auto& path : a.models) {
        require_input(path, "model");
        models.push_back(load_model(path));
        if (&path == &a.models.front()) modes = models.back().corrected_modes;
        else if (models.back().corrected_modes != modes)
            throw UsageError("model " + path + " corrects a different mode set");
    }

    std::vector<NamedEstimator> estimators;
    if (a.zero) estimators.push_back(zero_entry());
    if (a.oracle) estimators.push_back(oracle_entry());
    for (const auto& m : models) estimators.push_back(mlao_entry(m, make_scheme(m.scheme_tag, modes)));
    if (a.conv_2n1) estimators.push_back(baseline_entry(baseline_config(s, BaselineConfig::Variant::two_n_plus_one, modes)));
    if (a.conv_3n) estimators.push_back(baseline_entry(baseline_config(s, BaselineConfig::Variant::three_n, modes)));
    if (estimators.empty()) throw UsageError("no estimators selected");

    const auto report = compare(compare_setup(s, modes), estimators, a.trials, bins, a.iterations, a.common.seed);

    std::ostringstream text;
    CsvWriter csv(text);
    write_provenance(csv, provenance(s, "compare", a.common.seed));
    write_binned_csv(text, report.binned());
    write_text_atomically(a.out, text.str());
    if (!a.trajectory.empty()) {
        std::ostringstream traj;
        CsvWriter tcsv(traj);
        write_provenance(tcsv, provenance(s, "compare", a.common.seed));
        write_trajectory_csv(traj, report.rows);
        write_text_atomically(a.trajectory, traj.str());
    }
    std::cout << "wrote " << a.out << "\n";
    return 0;
}

struct AnalyzeArgs {
    Common common;
    std::vector<std::string> models;
    std::string fresh_scheme;
    std::string out;
    std::string profile_out;
    std::string threshold_image;
};

int cmd_analyze(const AnalyzeArgs& a)
{
    Settings s = read_settings(a.common.config);
    std::vector<std::pair<std::string, LayerWeightRms>> rows;
    for (const auto& path : a.models) {
        require_input(path, "model");
        const auto m = load_model(path);
        rows.emplace_back(mlao::to_string(m.scheme_tag), layer_weight_rms(m));
    }
    if (!a.fresh_scheme.empty()) {
        Rng rng = make_stream(a.common.seed, 0x494e4954);
        const auto m = init_model(rng, make_scheme(scheme_tag_from_string(a.fresh_scheme), s.dataset.corrected_modes));
        rows.emplace_back(a.fresh_scheme + "_init", layer_weight_rms(m));
    }
    if (rows.empty() && a.profile_out.empty() && a.threshold_image.empty())
        throw UsageError("nothing to analyze: give --model, --fresh, --profile-out or --threshold-image");

    if (!rows.empty()) {
        if (a.out.empty()) throw UsageError("--out is required for the weight table");
        std::ostringstream text;
        write_weight_table(text, rows);
        write_text_atomically(a.out, text.str());
        std::cout << "wrote " << a.out << "\n";
    }

    if (!a.profile_out.empty()) {
        constexpr int size = 64;
        std::vector<std::pair<std::string, Frame>> patterns;
        patterns.emplace_back("blob", disc_pattern(size, 10.0));
        patterns.emplace_back("dot", disc_pattern(size, 0.0));
        for (int spacing : {1, 2, 4, 8, 12}) patterns.emplace_back("four_dot_" + std::to_string(spacing), four_dot_pattern(size, spacing));
        std::ostringstream text;
        CsvWriter csv(text);
        csv.row({"pattern", "tap", "max", "ratio"});
        for (const auto& [name, pattern] : patterns) {
            const auto p = layer_response_profile(pattern, blur_kernel());
            for (std::size_t i = 0; i < p.maxima.size(); ++i)
                csv.row({name, std::to_string(i), format_double(p.maxima[i]), format_double(p.ratios[i])});
        }
        write_text_atomically(a.profile_out, text.str());
        std::cout << "wrote " << a.profile_out << "\n";
    }

    if (!a.threshold_image.empty()) {
        require_input(a.threshold_image, "image");
        const auto t = spectral_threshold(read_pgm(a.threshold_image));
        if (t.noise_only) std::cout << "spectral threshold: no content above the noise floor\n";
        else std::cout << "spectral threshold: " << format_double(t.cycles_per_pixel) << " cycles/pixel\n";
    }
    return 0;
}

struct SweepArgs {
    Common common;
    std::string model;
    std::string factors = "0.8,1.0,1.1,1.2,1.4";
    std::string out;
    long long samples = 200;
};

int cmd_sweep(const SweepArgs& a)
{
    Settings s = read_settings(a.common.config);
    require_input(a.model, "model");
    const auto model = load_model(a.model);
    const auto factors = parse_double_list(a.factors);
    if (factors.empty()) throw UsageError("--factors must list at least one value");
    for (double f : factors)
        if (!(f > 0.0)) throw UsageError("sampling factors must be positive");
    if (a.samples < 1) throw UsageError("--samples must be >= 1");

    DatasetSpec spec = s.dataset;
    spec.scheme_tag = model.scheme_tag;
    spec.corrected_modes = model.corrected_modes;
    spec.n_samples = static_cast<std::size_t>(a.samples);
    spec.seed = a.common.seed;
    const auto rows = sampling_sweep(model, spec, factors);

    std::ostringstream text;
    CsvWriter csv(text);
    write_provenance(csv, provenance(s, "sweep", a.common.seed));
    csv.row({"sampling_factor", "count", "input_mean", "residual_mean", "residual_sd"});
    for (const auto& r : rows)
        csv.row({format_double(r.factor), std::to_string(r.count), format_double(r.input_mean),
                 format_double(r.residual_mean), format_double(r.residual_sd)});
    write_text_atomically(a.out, text.str());
    std::cout << "wrote " << a.out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Simulation, training and evaluation of learned sensorless adaptive optics"};
    app.require_subcommand(1);
    const std::vector<std::string> scheme_names{"ast2", "ast4", "2n", "4n"};
    const std::vector<std::string> modality_names{"wf", "widefield", "2p", "3p"};

    DatagenArgs dg;
    auto* datagen = app.add_subcommand("datagen", "generate a training dataset");
    add_common(datagen, dg.common);
    datagen->add_option("--out", dg.out, "dataset file")->required();
    datagen->add_option("--scheme", dg.scheme)->check(CLI::IsMember(scheme_names));
    datagen->add_option("--modality", dg.modality)->check(CLI::IsMember(modality_names));
    datagen->add_option("--samples", dg.samples, "number of samples");

    TrainArgs tr;
    auto* train_cmd = app.add_subcommand("train", "train a model on a dataset");
    add_common(train_cmd, tr.common);
    train_cmd->add_option("--data", tr.data, "dataset file")->required();
    train_cmd->add_option("--out", tr.out, "model file")->required();
    train_cmd->add_option("--loss-csv", tr.loss_csv, "loss history (default: <out>.loss.csv)");
    train_cmd->add_option("--scheme", tr.scheme, "expected scheme of the dataset")->check(CLI::IsMember(scheme_names));
    train_cmd->add_option("--epochs", tr.epochs);
    train_cmd->add_option("--lr", tr.learning_rate);
    train_cmd->add_option("--batch", tr.batch_size);
    train_cmd->add_flag("--serial", tr.serial, "use the single-threaded gradient");

    CorrectArgs co;
    auto* correct = app.add_subcommand("correct", "iterative correction on simulated microscopes");
    add_common(correct, co.common);
    correct->add_option("--model", co.model, "model file");
    correct->add_option("--scheme", co.scheme)->check(CLI::IsMember(scheme_names));
    correct->add_option("--modality", co.modality)->check(CLI::IsMember(modality_names));
    correct->add_option("--out", co.out, "trajectory CSV")->required();
    correct->add_option("--trials", co.trials);
    correct->add_option("--iterations", co.iterations);
    correct->add_option("--rms", co.rms, "input aberration rms (rad)");
    correct->add_flag("--oracle", co.oracle, "apply the exact correction instead of a model");
    correct->add_option("--dump-images", co.dump_dir, "directory for graymap dumps");

    CompareArgs cp;
    auto* compare_cmd = app.add_subcommand("compare", "binned comparison of estimators");
    add_common(compare_cmd, cp.common);
    compare_cmd->add_option("--model", cp.models, "model file (repeatable)");
    compare_cmd->add_option("--modality", cp.modality)->check(CLI::IsMember(modality_names));
    compare_cmd->add_option("--out", cp.out, "binned CSV")->required();
    compare_cmd->add_option("--trajectory", cp.trajectory, "per-trial CSV");
    compare_cmd->add_option("--bins", cp.bins, "rms bins lo:hi,...");
    compare_cmd->add_option("--trials", cp.trials, "trials per bin");
    compare_cmd->add_option("--iterations", cp.iterations);
    compare_cmd->add_flag("--conv-2n1", cp.conv_2n1, "include the 2N+1 baseline");
    compare_cmd->add_flag("--conv-3n", cp.conv_3n, "include the 3N baseline");
    compare_cmd->add_flag("--zero", cp.zero, "include the no-correction estimator");
    compare_cmd->add_flag("--oracle", cp.oracle, "include the exact correction");

    AnalyzeArgs an;
    auto* analyze = app.add_subcommand("analyze", "weight RMS table, layer profiles, spectral threshold");
    add_common(analyze, an.common);
    analyze->add_option("--model", an.models, "model file (repeatable)");
    analyze->add_option("--fresh", an.fresh_scheme, "include a freshly initialised model")->check(CLI::IsMember(scheme_names));
    analyze->add_option("--out", an.out, "weight RMS CSV");
    analyze->add_option("--profile-out", an.profile_out, "layer response profile CSV");
    analyze->add_option("--threshold-image", an.threshold_image, "8-bit graymap for the spectral threshold");

    SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep", "accuracy against sampling factor");
    add_common(sweep, sw.common);
    sweep->add_option("--model", sw.model, "model file")->required();
    sweep->add_option("--factors", sw.factors, "comma-separated sampling factors");
    sweep->add_option("--samples", sw.samples, "test samples per factor");
    sweep->add_option("--out", sw.out, "sweep CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*datagen) return cmd_datagen(dg);
        if (*train_cmd) return cmd_train(tr);
        if (*correct) return cmd_correct(co);
        if (*compare_cmd) return cmd_compare(cp);
        if (*analyze) return cmd_analyze(an);
        if (*sweep) return cmd_sweep(sw);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
