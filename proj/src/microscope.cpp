#include "mlao/microscope.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "mlao/config.hpp"
#include "mlao/metrics.hpp"

namespace mlao {

namespace {

std::vector<int> all_modes()
{
    std::vector<int> m(35);
    std::iota(m.begin(), m.end(), 2);
    return m;
}

double safe_sharpness(const Frame& f)
{
    try {
        return metric_sharpness(f);
    } catch (const DegenerateInputError&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

} // namespace

MicroscopeConfig MicroscopeConfig::noisy()
{
    MicroscopeConfig m;
    m.noise.poisson_peak_counts = 3000.0;
    m.noise.gaussian_sigma = 0.001;
    m.noise.background_offset = 0.01;
    return m;
}

std::shared_ptr<const OpticalSystem> VirtualMicroscope::make_system(const MicroscopeConfig& cfg)
{
    return std::make_shared<const OpticalSystem>(cfg.grid_size, cfg.sampling_factor, cfg.modality, all_modes());
}

VirtualMicroscope::VirtualMicroscope(const MicroscopeConfig& cfg, Frame specimen, ZernikeVector true_aberration,
                                     std::uint64_t noise_seed)
    : VirtualMicroscope(make_system(cfg), cfg, std::move(specimen), std::move(true_aberration), noise_seed)
{
}

VirtualMicroscope::VirtualMicroscope(std::shared_ptr<const OpticalSystem> system, const MicroscopeConfig& cfg,
                                     Frame specimen, ZernikeVector true_aberration, std::uint64_t noise_seed)
    : system_(std::move(system)),
      cfg_(cfg),
      former_(specimen),
      truth_(std::move(true_aberration)),
      rng_(splitmix64(noise_seed))
{
    require(specimen.width() == system_->grid_size() && specimen.height() == system_->grid_size(),
            "specimen size does not match the microscope grid");
    require(cfg_.noise.valid(), "noise parameters must be non-negative");
}

Frame VirtualMicroscope::acquire(const ZernikeVector& bias)
{
    log_.push_back({corrector_, bias});
    Frame img = former_.form(system_->render(truth_ + corrector_ + bias));
    return cfg_.noise.is_zero() ? img : add_noise(rng_, img, cfg_.noise);
}

void VirtualMicroscope::apply_correction(const ZernikeVector& delta) { corrector_ += delta; }

Frame VirtualMicroscope::render_clean(const ZernikeVector& bias) const
{
    return former_.form(system_->render(truth_ + corrector_ + bias));
}

MlaoEstimator::MlaoEstimator(const NetworkModel& model, CorrectionScheme scheme, double epsilon)
    : model_(model), scheme_(std::move(scheme)), epsilon_(epsilon)
{
    require(model_.input_channels() == scheme_.images_per_cycle(),
            "model expects " + std::to_string(model_.input_channels()) + " channels but scheme " +
                to_string(scheme_.tag) + " provides " + std::to_string(scheme_.images_per_cycle()));
    require(model_.n_modes() == scheme_.n_modes() && model_.corrected_modes == scheme_.corrected_modes,
            "model and scheme correct different modes");
    require(model_.scheme_tag == scheme_.tag,
            "model was trained for scheme " + to_string(model_.scheme_tag) + ", not " + to_string(scheme_.tag));
}

ZernikeVector MlaoEstimator::estimate(Acquisition& scope) const
{
    std::vector<Frame> images;
    for (const auto& b : scheme_.biases()) images.push_back(scope.acquire(b));
    return forward(model_, build_input_stack(images, scheme_, epsilon_));
}

void MlaoEstimator::run_cycle(Acquisition& scope) { scope.apply_correction(estimate(scope)); }

std::string BaselineEstimator::name() const
{
    return cfg_.variant == BaselineConfig::Variant::two_n_plus_one ? "conv_2n_plus_1" : "conv_3n";
}

void OracleEstimator::run_cycle(Acquisition& scope) { scope.apply_correction(-(truth_ + scope.corrector_state())); }

Trajectory run_estimator(VirtualMicroscope& scope, Estimator& estimator, int iterations)
{
    require(iterations >= 0, "iterations must be >= 0");
    Trajectory t;
    t.input_rms = scope.residual_rms();
    auto snapshot = [&](int it) {
        const Frame clean = scope.render_clean();
        t.points.push_back({it, scope.images_acquired(), scope.residual_rms(), metric_intensity(clean), safe_sharpness(clean)});
    };
    snapshot(0);
    for (int it = 1; it <= iterations; ++it) {
        estimator.run_cycle(scope);
        snapshot(it);
    }
    return t;
}

Trajectory run_mlao(VirtualMicroscope& scope, const NetworkModel& model, const CorrectionScheme& scheme, int iterations)
{
    MlaoEstimator est(model, scheme);
    return run_estimator(scope, est, iterations);
}

NamedEstimator mlao_entry(const NetworkModel& model, const CorrectionScheme& scheme, std::string name)
{
    if (name.empty()) name = "mlao_" + to_string(scheme.tag);
    return {name, [&model, scheme](const ZernikeVector&) { return std::make_unique<MlaoEstimator>(model, scheme); }};
}

NamedEstimator baseline_entry(const BaselineConfig& cfg, std::string name)
{
    if (name.empty()) name = BaselineEstimator(cfg).name();
    return {name, [cfg](const ZernikeVector&) { return std::make_unique<BaselineEstimator>(cfg); }};
}

NamedEstimator zero_entry()
{
    return {"zero", [](const ZernikeVector&) { return std::make_unique<ZeroEstimator>(); }};
}

NamedEstimator oracle_entry()
{
    return {"oracle", [](const ZernikeVector& truth) { return std::make_unique<OracleEstimator>(truth); }};
}

CompareReport compare(const CompareSetup& setup, const std::vector<NamedEstimator>& estimators, int trials,
                      const std::vector<RmsBin>& bins, int iterations, std::uint64_t seed)
{
    require(trials >= 1, "trials must be >= 1");
    require(iterations >= 1, "iterations must be >= 1");
    require(!setup.aberration_modes.empty(), "aberration modes must not be empty");
    for (const auto& b : bins) require(b.lo >= 0.0 && b.hi > b.lo, "rms bins must satisfy 0 <= lo < hi");
    const auto system = VirtualMicroscope::make_system(setup.microscope);

    const std::ptrdiff_t total = static_cast<std::ptrdiff_t>(bins.size()) * trials;
    std::vector<std::vector<CompareRow>> per_trial(static_cast<std::size_t>(total));
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t idx = 0; idx < total; ++idx) {
        const auto& bin = bins[static_cast<std::size_t>(idx / trials)];
        Rng rng = make_stream(seed, static_cast<std::uint64_t>(idx));
        const Frame specimen = synth_specimen(rng, setup.specimen, setup.microscope.grid_size);
        ZernikeVector truth = sample_aberration_in_range(rng, bin.lo, bin.hi, setup.aberration_modes);
        if (setup.xi_range > 0.0) {
            std::uniform_real_distribution<double> u(-setup.xi_range, setup.xi_range);
            for (int m : setup.xi_modes) truth.add(m, u(rng));
        }
        const std::uint64_t noise_seed = rng();
        auto& rows = per_trial[static_cast<std::size_t>(idx)];
        for (const auto& entry : estimators) {
            VirtualMicroscope scope(system, setup.microscope, specimen, truth, noise_seed);
            auto est = entry.make(truth);
            const auto traj = run_estimator(scope, *est, iterations);
            for (std::size_t k = 1; k < traj.points.size(); ++k) {
                const auto& p = traj.points[k];
                rows.push_back({static_cast<int>(idx), entry.name, p.iteration, p.images_cum, traj.input_rms,
                                p.residual_rms, p.y_intensity, p.y_sharpness});
            }
        }
    }
    CompareReport report;
    report.bins = bins;
    for (auto& rows : per_trial) report.rows.insert(report.rows.end(), rows.begin(), rows.end());
    return report;
}

std::vector<CompareBinRow> CompareReport::binned() const
{
    std::vector<std::string> names;
    int max_iter = 0;
    for (const auto& r : rows) {
        if (std::find(names.begin(), names.end(), r.estimator) == names.end()) names.push_back(r.estimator);
        max_iter = std::max(max_iter, r.iteration);
    }
    std::vector<CompareBinRow> out;
    for (const auto& name : names) {
        for (const auto& bin : bins) {
            for (int it = 1; it <= max_iter; ++it) {
                std::vector<double> in, res;
                std::size_t images = 0;
                for (const auto& r : rows) {
                    if (r.estimator != name || r.iteration != it || r.input_rms < bin.lo || r.input_rms >= bin.hi) continue;
                    in.push_back(r.input_rms);
                    res.push_back(r.residual_rms);
                    images = r.images_cum;
                }
                if (in.empty()) continue;
                out.push_back({name, bin, it, images, in.size(), mean(in), sample_sd(in), mean(res), sample_sd(res)});
            }
        }
    }
    return out;
}

std::optional<CompareBinRow> CompareReport::find(const std::string& estimator, std::size_t bin, int iteration) const
{
    for (const auto& r : binned()) {
        if (r.estimator == estimator && r.iteration == iteration && r.bin.lo == bins.at(bin).lo && r.bin.hi == bins.at(bin).hi)
            return r;
    }
    return std::nullopt;
}

void write_trajectory_csv(std::ostream& out, const std::vector<CompareRow>& rows)
{
    CsvWriter csv(out);
    csv.row({"trial", "estimator", "iteration", "images_cum", "input_rms", "residual_rms", "y_I", "y_S"});
    for (const auto& r : rows) {
        csv.row({std::to_string(r.trial), r.estimator, std::to_string(r.iteration), std::to_string(r.images_cum),
                 format_double(r.input_rms), format_double(r.residual_rms), format_double(r.y_intensity),
                 format_double(r.y_sharpness)});
    }
}

void write_binned_csv(std::ostream& out, const std::vector<CompareBinRow>& rows)
{
    CsvWriter csv(out);
    csv.row({"estimator", "bin_lo", "bin_hi", "iteration", "images_cum", "count", "input_mean", "input_sd",
             "residual_mean", "residual_sd"});
    for (const auto& r : rows) {
        csv.row({r.estimator, format_double(r.bin.lo), format_double(r.bin.hi), std::to_string(r.iteration),
                 std::to_string(r.images_cum), std::to_string(r.count), format_double(r.input_mean),
                 format_double(r.input_sd), format_double(r.residual_mean), format_double(r.residual_sd)});
    }
}

} // namespace mlao
