#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "mlao/config.hpp"
#include "mlao/imaging.hpp"
#include "mlao/network.hpp"
#include "mlao/optics.hpp"
#include "mlao/pseudo_psf.hpp"
#include "mlao/scheme.hpp"
#include "mlao/zernike.hpp"

namespace mlao {

/// Noise parameters drawn per sample: each field is log-uniform between its
/// bounds; a zero upper bound disables it and a zero lower bound gives a
/// uniform draw on [0, hi].
struct NoiseRange {
    NoiseConfig lo;
    NoiseConfig hi;

    NoiseConfig draw(Rng& rng) const;
    void validate() const;
};

struct DatasetSpec {
    std::size_t n_samples = 20000;
    Modality modality = Modality::two_photon;
    int grid_size = 128;
    double sampling_lo = 1.0;
    double sampling_hi = 1.2;
    SchemeTag scheme_tag = SchemeTag::ast2;
    std::vector<int> corrected_modes = default_corrected_modes();
    double max_norm = 2.5;
    double label_jitter_sigma = 0.05;
    std::vector<int> xi_modes = {}; // empty: Noll 14-21 minus the corrected modes
    double xi_range = 0.1;
    NoiseRange noise = default_noise();
    SpecimenKind specimen = SpecimenKind::mixed;
    std::string specimen_dir;      // optional pool of real images (8-bit PGM)
    double imported_fraction = 0.5; // share of samples drawn from the pool when present
    double epsilon = kDefaultEpsilon;
    std::uint64_t seed = 1;

    CorrectionScheme scheme() const { return make_scheme(scheme_tag, corrected_modes); }
    std::vector<int> effective_xi_modes() const;
    void validate() const;

    KeyValueConfig to_config() const;
    /// Reads recognised keys over the defaults; unknown keys are rejected.
    static DatasetSpec from_config(const KeyValueConfig& cfg);
    std::string serialize() const { return to_config().serialize(); }

    static NoiseRange default_noise();
};

struct Sample {
    PseudoStack stack;
    ZernikeVector label; // jittered correction over the corrected modes
    ZernikeVector psi;   // specimen aberration over the corrected modes
    ZernikeVector xi;    // non-correctable component
    double sampling_factor = 1.0;
    NoiseConfig noise;
};

/// One sample: specimen, aberrations, biased images, noise, pseudo-PSF stack.
/// The label is the correction -psi plus Gaussian jitter.
Sample generate_sample(Rng& rng, const DatasetSpec& spec);
/// Sample `index` of the run seeded by spec.seed.
Sample generate_sample(const DatasetSpec& spec, std::uint64_t index);

/// Flat storage of one sample as read back from a dataset file.
struct Record {
    float sampling_factor = 1.0f;
    std::vector<float> label;
    std::vector<float> psi;
    std::vector<float> xi;
    std::vector<float> input; // channel-major stack
};

Record to_record(const Sample& s, const DatasetSpec& spec);

struct Dataset {
    DatasetSpec spec;
    std::vector<Record> records;

    std::size_t size() const { return records.size(); }
};

/// Streams samples to `path`: magic, version, spec header (length-prefixed
/// key=value text), sample count, then per sample a u32 float count and the
/// float32 payload [sampling_factor, label, psi, xi, stack]. Parallel over
/// samples; contents depend only on the spec.
void generate_dataset(const DatasetSpec& spec, const std::filesystem::path& path);
/// Single-threaded reference; writes byte-identical files.
void generate_dataset_serial(const DatasetSpec& spec, const std::filesystem::path& path);
/// In-memory variants.
Dataset generate_dataset(const DatasetSpec& spec);
Dataset generate_dataset_serial(const DatasetSpec& spec);

void write_dataset(const Dataset& data, const std::filesystem::path& path);
DatasetSpec read_dataset_header(const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);
/// Rejects files generated for a different scheme or mode set.
Dataset read_dataset(const std::filesystem::path& path, const CorrectionScheme& expected);

struct TrainConfig {
    Hyper hyper;
    int epochs = 30;
    double validation_fraction = 0.1;
    std::uint64_t seed = 1;
    bool parallel = true;
};

struct EpochLoss {
    int epoch = 0;
    double train = 0.0;      // mean batch RMS loss (data term)
    double validation = 0.0; // RMS loss over the validation split
};

struct TrainResult {
    double initial_validation = 0.0;
    std::vector<EpochLoss> history;
};

using EpochCallback = std::function<void(const EpochLoss&)>;

/// Mini-batch AdamW over the first (1 - validation_fraction) of the records;
/// the tail is held out. Batches are reshuffled each epoch from the seed.
TrainResult train(NetworkModel& model, const Dataset& data, const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// RMS coefficient error over records [begin, end).
double validation_loss(const NetworkModel& model, const Dataset& data, std::size_t begin, std::size_t end);

struct RmsBin {
    double lo;
    double hi; // exclusive
};

struct BinStats {
    RmsBin bin;
    std::size_t count = 0;
    double input_mean = 0.0;
    double input_sd = 0.0;
    double residual_mean = 0.0;
    double residual_sd = 0.0;
};

struct Evaluation {
    std::vector<double> input_rms;
    std::vector<double> residual_rms;
    double input_mean = 0.0;
    double residual_mean = 0.0;
    double residual_sd = 0.0;

    std::vector<BinStats> binned(const std::vector<RmsBin>& bins) const;
};

/// Predicted correction for a record.
using Predictor = std::function<ZernikeVector(const Record&)>;

Predictor network_predictor(const NetworkModel& model);
Predictor zero_predictor();
/// Returns the exact correction -psi.
Predictor oracle_predictor(std::vector<int> modes);

/// Residual rms(psi + correction) per record, one correction cycle.
Evaluation evaluate(const Predictor& predictor, const Dataset& data);
/// Single-threaded reference.
Evaluation evaluate_serial(const Predictor& predictor, const Dataset& data);
Evaluation evaluate(const NetworkModel& model, const Dataset& data);

struct SweepRow {
    double factor = 0.0;
    std::size_t count = 0;
    double input_mean = 0.0;
    double residual_mean = 0.0;
    double residual_sd = 0.0;
};

/// evaluate() on fresh test sets rendered at each sampling factor.
std::vector<SweepRow> sampling_sweep(const NetworkModel& model, const DatasetSpec& test_spec,
                                     const std::vector<double>& factors);

double mean(std::span<const double> v);
double sample_sd(std::span<const double> v);

} // namespace mlao
