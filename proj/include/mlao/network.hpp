#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mlao/common.hpp"
#include "mlao/pseudo_psf.hpp"
#include "mlao/scheme.hpp"
#include "mlao/zernike.hpp"

namespace mlao {

/// Layer geometry. The standard network uses four 3x3 convolutions with
/// 8/16/32/64 channels on 32x32 inputs, each followed by tanh and 2x2 max
/// pooling; the global maxima of the input and every convolution output are
/// concatenated into a dense tanh layer of 32 units and a linear output.
struct Architecture {
    int input_channels = 2;
    int input_size = kStackSize;
    std::vector<int> conv_widths = {8, 16, 32, 64};
    int hidden = 32;
    int outputs = 5;

    static Architecture standard(int input_channels, int outputs)
    {
        Architecture a;
        a.input_channels = input_channels;
        a.outputs = outputs;
        return a;
    }

    int conv_layers() const { return static_cast<int>(conv_widths.size()); }
    int concat_width() const;
    std::size_t parameter_count() const;
    void validate() const;

    friend bool operator==(const Architecture&, const Architecture&) = default;
};

inline constexpr std::size_t kMinParameters = 28000;
inline constexpr std::size_t kMaxParameters = 32000;

/// Activations kept from a forward pass for the backward pass.
template <typename T>
struct Workspace {
    std::vector<std::vector<T>> col;    // per conv layer, [pixel][in_channel * 9]
    std::vector<std::vector<T>> act;    // per conv layer, tanh output [channel][pixel]
    std::vector<std::vector<T>> pooled; // per conv layer, [channel][pixel / 4]
    std::vector<std::vector<std::uint32_t>> pool_arg;
    std::vector<T> concat;
    std::vector<std::uint32_t> concat_arg;
    std::vector<T> hidden;
    std::vector<T> output;
    // backward scratch
    std::vector<T> col_rows, d_concat, d_hidden, d_pooled, d_col, d_next;
};

/// Flat parameter vector in declaration order: for each conv layer the
/// kernel [out][in][3][3] then bias; dense kernel [concat][hidden] then
/// bias; output kernel [hidden][outputs] then bias.
template <typename T>
class Network {
public:
    Network() = default;
    explicit Network(Architecture arch);

    /// Glorot-uniform kernels, zero biases.
    static Network glorot(Rng& rng, Architecture arch);

    const Architecture& architecture() const { return arch_; }
    std::span<T> parameters() { return params_; }
    std::span<const T> parameters() const { return params_; }
    std::size_t parameter_count() const { return params_.size(); }

    struct Block {
        std::size_t offset;
        std::size_t size;
        bool is_kernel;
    };
    /// Parameter blocks in declaration order (kernel/bias alternating).
    const std::vector<Block>& blocks() const { return blocks_; }
    std::span<const T> conv_kernel(int layer) const { return slice(blocks_[2 * layer]); }
    std::span<const T> conv_bias(int layer) const { return slice(blocks_[2 * layer + 1]); }
    std::span<const T> dense_kernel() const { return slice(blocks_[2 * arch_.conv_layers()]); }
    std::span<const T> dense_bias() const { return slice(blocks_[2 * arch_.conv_layers() + 1]); }
    std::span<const T> output_kernel() const { return slice(blocks_[2 * arch_.conv_layers() + 2]); }
    std::span<const T> output_bias() const { return slice(blocks_[2 * arch_.conv_layers() + 3]); }

    /// Input is channel-major [channel][y][x].
    std::vector<T> forward(std::span<const T> input) const;
    void forward(std::span<const T> input, Workspace<T>& ws) const;
    /// Accumulates d(output . d_output)/d(params) into grad.
    void backward(std::span<const T> input, Workspace<T>& ws, std::span<const T> d_output, std::span<T> grad) const;

    std::size_t input_length() const
    {
        return static_cast<std::size_t>(arch_.input_channels) * arch_.input_size * arch_.input_size;
    }

    template <typename U>
    Network<U> cast() const
    {
        Network<U> out(arch_);
        auto p = out.parameters();
        for (std::size_t i = 0; i < params_.size(); ++i) p[i] = static_cast<U>(params_[i]);
        return out;
    }

private:
    std::span<const T> slice(const Block& b) const { return std::span<const T>(params_).subspan(b.offset, b.size); }

    Architecture arch_;
    std::vector<T> params_;
    std::vector<Block> blocks_;
};

extern template class Network<float>;
extern template class Network<double>;

struct TrainingExample {
    std::vector<float> input;  // channel-major pseudo-PSF stack
    std::vector<float> label;  // corrections for the corrected modes
};

template <typename T>
struct Example {
    std::span<const T> input;
    std::span<const T> label;
};

struct Regularization {
    double l1 = 1e-6;
    double l2 = 1e-5;
};

template <typename T>
struct LossAndGrad {
    double loss = 0.0;       // data term + regularization
    double data_loss = 0.0;  // RMS coefficient error
    std::vector<T> grad;
};

/// RMS coefficient error over the batch plus l1*sum|w| + l2*sum(w^2) over
/// kernels (biases are not regularized). The l1 subgradient at zero is zero.
/// Serial reference.
template <typename T>
LossAndGrad<T> loss_and_grad_serial(const Network<T>& net, std::span<const Example<T>> batch, const Regularization& reg);

/// Same computation with per-sample work spread over OpenMP threads; the
/// reduction order is fixed so results are bitwise identical to the serial path.
template <typename T>
LossAndGrad<T> loss_and_grad(const Network<T>& net, std::span<const Example<T>> batch, const Regularization& reg);

/// Loss only (no gradient), used by finite-difference checks.
template <typename T>
double batch_loss(const Network<T>& net, std::span<const Example<T>> batch, const Regularization& reg);

struct Hyper {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-4;
    double l1 = 1e-6;
    double l2 = 1e-5;
    int batch_size = 64;

    Regularization regularization() const { return {l1, l2}; }
};

template <typename T>
struct TrainState {
    long step = 0;
    std::vector<T> m;
    std::vector<T> v;
    Hyper hyper;

    static TrainState for_model(const Network<T>& net, Hyper h)
    {
        return {0, std::vector<T>(net.parameter_count(), T(0)), std::vector<T>(net.parameter_count(), T(0)), h};
    }
};

/// AdamW with bias-corrected moments and decoupled decay:
/// w <- w (1 - lr wd) - lr m_hat / (sqrt(v_hat) + eps).
template <typename T>
void adamw_step(Network<T>& net, TrainState<T>& state, std::span<const T> grad);

/// A trained estimator: network plus the scheme it was built for.
struct NetworkModel {
    Network<float> network;
    SchemeTag scheme_tag = SchemeTag::ast2;
    std::vector<int> corrected_modes;

    int input_channels() const { return network.architecture().input_channels; }
    int n_modes() const { return network.architecture().outputs; }
};

/// Standard architecture, Glorot-uniform init. Throws if the parameter count
/// falls outside [28000, 32000].
NetworkModel init_model(Rng& rng, const CorrectionScheme& scheme);
Network<float> init_network(Rng& rng, int input_channels, int n_modes);

/// Predicted correction for the corrected modes.
ZernikeVector forward(const NetworkModel& model, const PseudoStack& stack);

/// Little-endian binary: magic, version, header (M_c, N, scheme tag,
/// corrected modes, layer dims), then parameters as float32 in declaration order.
void save_model(const std::filesystem::path& path, const NetworkModel& model);
NetworkModel load_model(const std::filesystem::path& path);
/// Also checks that the file matches the evaluation context.
NetworkModel load_model(const std::filesystem::path& path, const CorrectionScheme& expected);

} // namespace mlao
