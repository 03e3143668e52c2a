#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mlao/acquisition.hpp"
#include "mlao/baselines.hpp"
#include "mlao/imaging.hpp"
#include "mlao/network.hpp"
#include "mlao/scheme.hpp"
#include "mlao/simulation.hpp"
#include "mlao/training.hpp"

namespace mlao {

struct MicroscopeConfig {
    int grid_size = 128;
    double sampling_factor = 1.1;
    Modality modality = Modality::two_photon;
    NoiseConfig noise;

    /// Moderate shot, read and background noise (3000 counts at unit
    /// intensity, sigma 0.001, offset 0.01).
    static MicroscopeConfig noisy();
};

/// Simulated microscope with a hidden aberration. Estimators see it only
/// through Acquisition; the extra accessors are for the evaluation harness.
class VirtualMicroscope final : public Acquisition {
public:
    struct LogEntry {
        ZernikeVector corrector;
        ZernikeVector bias;
    };

    VirtualMicroscope(const MicroscopeConfig& cfg, Frame specimen, ZernikeVector true_aberration,
                      std::uint64_t noise_seed);
    VirtualMicroscope(std::shared_ptr<const OpticalSystem> system, const MicroscopeConfig& cfg, Frame specimen,
                      ZernikeVector true_aberration, std::uint64_t noise_seed);

    Frame acquire(const ZernikeVector& bias) override;
    void apply_correction(const ZernikeVector& delta) override;
    const ZernikeVector& corrector_state() const override { return corrector_; }
    int modality_exponent() const override { return system_->exponent(); }
    std::size_t images_acquired() const override { return log_.size(); }

    // Harness-only accessors.
    const ZernikeVector& true_aberration() const { return truth_; }
    /// rms(true + corrector), over every mode including non-correctable ones.
    double residual_rms() const { return rms(truth_ + corrector_); }
    /// Noise-free image at the current state; not logged or counted.
    Frame render_clean(const ZernikeVector& bias = {}) const;
    const std::vector<LogEntry>& acquisition_log() const { return log_; }
    const OpticalSystem& system() const { return *system_; }

    /// Shared optical system covering Noll 2-36 for the configuration.
    static std::shared_ptr<const OpticalSystem> make_system(const MicroscopeConfig& cfg);

private:
    std::shared_ptr<const OpticalSystem> system_;
    MicroscopeConfig cfg_;
    ImageFormer former_;
    ZernikeVector truth_;
    ZernikeVector corrector_;
    Rng rng_;
    std::vector<LogEntry> log_;
};

/// One acquire-estimate-apply cycle per call.
class Estimator {
public:
    virtual ~Estimator() = default;
    virtual std::string name() const = 0;
    virtual void run_cycle(Acquisition& scope) = 0;
};

class MlaoEstimator final : public Estimator {
public:
    MlaoEstimator(const NetworkModel& model, CorrectionScheme scheme, double epsilon = kDefaultEpsilon);
    std::string name() const override { return "mlao_" + to_string(scheme_.tag); }
    void run_cycle(Acquisition& scope) override;
    /// Correction predicted from one set of acquisitions, without applying it.
    ZernikeVector estimate(Acquisition& scope) const;

private:
    const NetworkModel& model_;
    CorrectionScheme scheme_;
    double epsilon_;
};

class BaselineEstimator final : public Estimator {
public:
    explicit BaselineEstimator(BaselineConfig cfg) : cfg_(std::move(cfg)) {}
    std::string name() const override;
    void run_cycle(Acquisition& scope) override { run_baseline(scope, cfg_); }

private:
    BaselineConfig cfg_;
};

class ZeroEstimator final : public Estimator {
public:
    std::string name() const override { return "zero"; }
    void run_cycle(Acquisition&) override {}
};

/// Applies the exact remaining correction. Built by the harness from the
/// ground truth; the only estimator that knows it.
class OracleEstimator final : public Estimator {
public:
    explicit OracleEstimator(ZernikeVector truth) : truth_(std::move(truth)) {}
    std::string name() const override { return "oracle"; }
    void run_cycle(Acquisition& scope) override;

private:
    ZernikeVector truth_;
};

struct TrajectoryPoint {
    int iteration = 0;
    std::size_t images_cum = 0;
    double residual_rms = 0.0;
    double y_intensity = 0.0;
    double y_sharpness = 0.0;
};

struct Trajectory {
    double input_rms = 0.0;
    std::vector<TrajectoryPoint> points; // index 0 is the uncorrected state
};

Trajectory run_estimator(VirtualMicroscope& scope, Estimator& estimator, int iterations);
/// Iterated MLAO correction; image count after k iterations is k * M.
Trajectory run_mlao(VirtualMicroscope& scope, const NetworkModel& model, const CorrectionScheme& scheme, int iterations);

struct CompareSetup {
    MicroscopeConfig microscope;
    std::vector<int> aberration_modes = default_corrected_modes();
    std::vector<int> xi_modes;
    double xi_range = 0.0;
    SpecimenKind specimen = SpecimenKind::dots;
};

/// Estimators are built per trial; the factory receives the ground truth so
/// that the oracle can be expressed, others ignore it.
struct NamedEstimator {
    std::string name;
    std::function<std::unique_ptr<Estimator>(const ZernikeVector& truth)> make;
};

NamedEstimator mlao_entry(const NetworkModel& model, const CorrectionScheme& scheme, std::string name = {});
NamedEstimator baseline_entry(const BaselineConfig& cfg, std::string name = {});
NamedEstimator zero_entry();
NamedEstimator oracle_entry();

struct CompareRow {
    int trial = 0;
    std::string estimator;
    int iteration = 0;
    std::size_t images_cum = 0;
    double input_rms = 0.0;
    double residual_rms = 0.0;
    double y_intensity = 0.0;
    double y_sharpness = 0.0;
};

struct CompareBinRow {
    std::string estimator;
    RmsBin bin;
    int iteration = 0;
    std::size_t images_cum = 0;
    std::size_t count = 0;
    double input_mean = 0.0;
    double input_sd = 0.0;
    double residual_mean = 0.0;
    double residual_sd = 0.0;
};

struct CompareReport {
    std::vector<RmsBin> bins;
    std::vector<CompareRow> rows;

    std::vector<CompareBinRow> binned() const;
    /// Mean residual of `estimator` after `iteration` over trials in `bin`.
    std::optional<CompareBinRow> find(const std::string& estimator, std::size_t bin, int iteration) const;
};

/// For every bin, `trials` fresh (specimen, aberration) draws with input rms
/// uniform in the bin; every estimator starts from the same microscope state.
/// Trial t of bin b uses stream index b * trials + t of `seed`.
CompareReport compare(const CompareSetup& setup, const std::vector<NamedEstimator>& estimators, int trials,
                      const std::vector<RmsBin>& bins, int iterations, std::uint64_t seed);

/// Columns: trial, estimator, iteration, images_cum, input_rms, residual_rms, y_I, y_S.
void write_trajectory_csv(std::ostream& out, const std::vector<CompareRow>& rows);
void write_binned_csv(std::ostream& out, const std::vector<CompareBinRow>& rows);

} // namespace mlao
