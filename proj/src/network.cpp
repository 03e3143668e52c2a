#include "mlao/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <Eigen/Core>
#include <omp.h>

#include "mlao/binary_io.hpp"

namespace mlao {

namespace {

constexpr char kModelMagic[8] = {'M', 'L', 'A', 'O', 'N', 'E', 'T', '1'};
constexpr std::uint32_t kModelVersion = 1;

template <typename T>
inline T dot(const T* a, const T* b, int n)
{
    T acc = 0;
#pragma omp simd reduction(+ : acc)
    for (int i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

template <typename T>
inline void axpy(T alpha, const T* x, T* y, int n)
{
#pragma omp simd
    for (int i = 0; i < n; ++i) y[i] += alpha * x[i];
}

// Transposed patch matrix: row (c*9 + ky*3 + kx) holds the input plane c
// shifted by (kx-1, ky-1) with zero padding.
template <typename T>
void im2col(const T* x, int channels, int size, std::vector<T>& col)
{
    const std::size_t p = static_cast<std::size_t>(size) * size;
    col.assign(p * channels * 9, T(0));
    for (int c = 0; c < channels; ++c) {
        const T* plane = x + c * p;
        for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
                T* row = col.data() + (static_cast<std::size_t>(c) * 9 + ky * 3 + kx) * p;
                const int x0 = std::max(0, 1 - kx), x1 = std::min(size, size + 1 - kx);
                for (int y = 0; y < size; ++y) {
                    const int sy = y + ky - 1;
                    if (sy < 0 || sy >= size) continue;
                    for (int xx = x0; xx < x1; ++xx) row[y * size + xx] = plane[sy * size + xx + kx - 1];
                }
            }
        }
    }
}

// Scatter-add of a row-layout patch gradient [pixel][c*9 + ky*3 + kx] back onto the input planes.
template <typename T>
void col2im(const std::vector<T>& dcol, int channels, int size, std::vector<T>& dx)
{
    const int k = channels * 9;
    dx.assign(static_cast<std::size_t>(channels) * size * size, T(0));
    for (int y = 0; y < size; ++y) {
        for (int xx = 0; xx < size; ++xx) {
            const T* row = dcol.data() + (static_cast<std::size_t>(y) * size + xx) * k;
            for (int c = 0; c < channels; ++c) {
                T* plane = dx.data() + static_cast<std::size_t>(c) * size * size;
                for (int ky = 0; ky < 3; ++ky) {
                    const int sy = y + ky - 1;
                    if (sy < 0 || sy >= size) continue;
                    for (int kx = 0; kx < 3; ++kx) {
                        const int sx = xx + kx - 1;
                        if (sx < 0 || sx >= size) continue;
                        plane[sy * size + sx] += row[c * 9 + ky * 3 + kx];
                    }
                }
            }
        }
    }
}

template <typename T>
void transpose(const std::vector<T>& src, int rows, int cols, std::vector<T>& dst)
{
    dst.resize(src.size());
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) dst[static_cast<std::size_t>(c) * rows + r] = src[static_cast<std::size_t>(r) * cols + c];
}

template <typename T>
void apply_tanh(T* v, int n)
{
    using Array = Eigen::Array<T, Eigen::Dynamic, 1>;
    Eigen::Map<Array> m(v, n);
    m = m.tanh();
}

// First maximum in row-major order.
template <typename T>
std::uint32_t argmax(const T* v, std::size_t n)
{
    std::uint32_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (v[i] > v[best]) best = static_cast<std::uint32_t>(i);
    return best;
}

double glorot_limit(double fan_in, double fan_out) { return std::sqrt(6.0 / (fan_in + fan_out)); }

} // namespace

int Architecture::concat_width() const
{
    return input_channels + std::accumulate(conv_widths.begin(), conv_widths.end(), 0);
}

std::size_t Architecture::parameter_count() const
{
    std::size_t total = 0;
    int in = input_channels;
    for (int w : conv_widths) {
        total += static_cast<std::size_t>(w) * in * 9 + w;
        in = w;
    }
    total += static_cast<std::size_t>(concat_width()) * hidden + hidden;
    total += static_cast<std::size_t>(hidden) * outputs + outputs;
    return total;
}

void Architecture::validate() const
{
    require(input_channels >= 1, "network needs at least one input channel");
    require(outputs >= 1, "network needs at least one output");
    require(hidden >= 1, "hidden layer must have at least one unit");
    require(!conv_widths.empty(), "network needs at least one convolution layer");
    for (int w : conv_widths) require(w >= 1, "convolution widths must be positive");
    require(input_size >= 2 && input_size % (1 << conv_layers()) == 0,
            "input size must be divisible by 2 for every pooling stage");
}

template <typename T>
Network<T>::Network(Architecture arch) : arch_(std::move(arch))
{
    arch_.validate();
    std::size_t offset = 0;
    auto add = [&](std::size_t size, bool kernel) {
        blocks_.push_back({offset, size, kernel});
        offset += size;
    };
    int in = arch_.input_channels;
    for (int w : arch_.conv_widths) {
        add(static_cast<std::size_t>(w) * in * 9, true);
        add(static_cast<std::size_t>(w), false);
        in = w;
    }
    add(static_cast<std::size_t>(arch_.concat_width()) * arch_.hidden, true);
    add(static_cast<std::size_t>(arch_.hidden), false);
    add(static_cast<std::size_t>(arch_.hidden) * arch_.outputs, true);
    add(static_cast<std::size_t>(arch_.outputs), false);
    params_.assign(offset, T(0));
}

template <typename T>
Network<T> Network<T>::glorot(Rng& rng, Architecture arch)
{
    Network net(std::move(arch));
    const auto& a = net.arch_;
    std::vector<std::pair<double, double>> fans;
    int in = a.input_channels;
    for (int w : a.conv_widths) {
        fans.emplace_back(9.0 * in, 9.0 * w);
        in = w;
    }
    fans.emplace_back(a.concat_width(), a.hidden);
    fans.emplace_back(a.hidden, a.outputs);
    std::size_t f = 0;
    for (const auto& b : net.blocks_) {
        if (!b.is_kernel) continue;
        const double lim = glorot_limit(fans[f].first, fans[f].second);
        std::uniform_real_distribution<double> u(-lim, lim);
        for (std::size_t i = 0; i < b.size; ++i) net.params_[b.offset + i] = static_cast<T>(u(rng));
        ++f;
    }
    return net;
}

template <typename T>
std::vector<T> Network<T>::forward(std::span<const T> input) const
{
    Workspace<T> ws;
    forward(input, ws);
    return ws.output;
}

template <typename T>
void Network<T>::forward(std::span<const T> input, Workspace<T>& ws) const
{
    require(input.size() == input_length(), "network input has the wrong length");
    const int layers = arch_.conv_layers();
    ws.col.resize(layers);
    ws.act.resize(layers);
    ws.pooled.resize(layers);
    ws.pool_arg.resize(layers);
    ws.concat.assign(arch_.concat_width(), T(0));
    ws.concat_arg.assign(arch_.concat_width(), 0);

    const int s0 = arch_.input_size;
    const std::size_t p0 = static_cast<std::size_t>(s0) * s0;
    for (int c = 0; c < arch_.input_channels; ++c) {
        const T* plane = input.data() + c * p0;
        const auto i = argmax(plane, p0);
        ws.concat[c] = plane[i];
        ws.concat_arg[c] = i;
    }

    const T* x = input.data();
    int in = arch_.input_channels;
    int size = s0;
    int tap = arch_.input_channels;
    for (int l = 0; l < layers; ++l) {
        const int out = arch_.conv_widths[l];
        const int k = in * 9;
        const int p = size * size;
        im2col(x, in, size, ws.col[l]);
        const T* w = params_.data() + blocks_[2 * l].offset;
        const T* b = params_.data() + blocks_[2 * l + 1].offset;
        auto& act = ws.act[l];
        act.resize(static_cast<std::size_t>(out) * p);
        for (int o = 0; o < out; ++o) {
            const T* wo = w + static_cast<std::size_t>(o) * k;
            T* ao = act.data() + static_cast<std::size_t>(o) * p;
            std::fill(ao, ao + p, b[o]);
            for (int j = 0; j < k; ++j) axpy(wo[j], ws.col[l].data() + static_cast<std::size_t>(j) * p, ao, p);
            apply_tanh(ao, p);
        }
        const int half = size / 2;
        const int pq = half * half;
        auto& pooled = ws.pooled[l];
        auto& parg = ws.pool_arg[l];
        pooled.resize(static_cast<std::size_t>(out) * pq);
        parg.resize(pooled.size());
        for (int o = 0; o < out; ++o) {
            const T* ao = act.data() + static_cast<std::size_t>(o) * p;
            for (int y = 0; y < half; ++y) {
                for (int xx = 0; xx < half; ++xx) {
                    const std::uint32_t cand[4] = {
                        static_cast<std::uint32_t>((2 * y) * size + 2 * xx),
                        static_cast<std::uint32_t>((2 * y) * size + 2 * xx + 1),
                        static_cast<std::uint32_t>((2 * y + 1) * size + 2 * xx),
                        static_cast<std::uint32_t>((2 * y + 1) * size + 2 * xx + 1)};
                    std::uint32_t best = cand[0];
                    for (int t = 1; t < 4; ++t)
                        if (ao[cand[t]] > ao[best]) best = cand[t];
                    const std::size_t dst = static_cast<std::size_t>(o) * pq + y * half + xx;
                    pooled[dst] = ao[best];
                    parg[dst] = best;
                }
            }
            const T* po = pooled.data() + static_cast<std::size_t>(o) * pq;
            const auto i = argmax(po, static_cast<std::size_t>(pq));
            ws.concat[tap + o] = po[i];
            ws.concat_arg[tap + o] = i;
        }
        tap += out;
        x = pooled.data();
        in = out;
        size = half;
    }

    const int d = arch_.concat_width();
    const int h = arch_.hidden;
    const T* wd = params_.data() + blocks_[2 * layers].offset;
    const T* bd = params_.data() + blocks_[2 * layers + 1].offset;
    ws.hidden.assign(bd, bd + h);
    for (int i = 0; i < d; ++i) axpy(ws.concat[i], wd + static_cast<std::size_t>(i) * h, ws.hidden.data(), h);
    apply_tanh(ws.hidden.data(), h);

    const int n = arch_.outputs;
    const T* wo = params_.data() + blocks_[2 * layers + 2].offset;
    const T* bo = params_.data() + blocks_[2 * layers + 3].offset;
    ws.output.assign(bo, bo + n);
    for (int i = 0; i < h; ++i) axpy(ws.hidden[i], wo + static_cast<std::size_t>(i) * n, ws.output.data(), n);
}

template <typename T>
void Network<T>::backward(std::span<const T> input, Workspace<T>& ws, std::span<const T> d_output,
                          std::span<T> grad) const
{
    (void)input;
    require(grad.size() == params_.size(), "gradient buffer has the wrong length");
    require(d_output.size() == static_cast<std::size_t>(arch_.outputs), "output gradient has the wrong length");
    const int layers = arch_.conv_layers();
    const int d = arch_.concat_width();
    const int h = arch_.hidden;
    const int n = arch_.outputs;

    const T* wo = params_.data() + blocks_[2 * layers + 2].offset;
    T* g_wo = grad.data() + blocks_[2 * layers + 2].offset;
    T* g_bo = grad.data() + blocks_[2 * layers + 3].offset;
    ws.d_hidden.assign(h, T(0));
    for (int j = 0; j < n; ++j) g_bo[j] += d_output[j];
    for (int i = 0; i < h; ++i) {
        axpy(ws.hidden[i], d_output.data(), g_wo + static_cast<std::size_t>(i) * n, n);
        ws.d_hidden[i] = dot(wo + static_cast<std::size_t>(i) * n, d_output.data(), n) * (T(1) - ws.hidden[i] * ws.hidden[i]);
    }

    const T* wd = params_.data() + blocks_[2 * layers].offset;
    T* g_wd = grad.data() + blocks_[2 * layers].offset;
    T* g_bd = grad.data() + blocks_[2 * layers + 1].offset;
    ws.d_concat.assign(d, T(0));
    for (int j = 0; j < h; ++j) g_bd[j] += ws.d_hidden[j];
    for (int i = 0; i < d; ++i) {
        axpy(ws.concat[i], ws.d_hidden.data(), g_wd + static_cast<std::size_t>(i) * h, h);
        ws.d_concat[i] = dot(wd + static_cast<std::size_t>(i) * h, ws.d_hidden.data(), h);
    }

    int tap = d;
    for (int l = layers - 1; l >= 0; --l) {
        const int out = arch_.conv_widths[l];
        const int in = l == 0 ? arch_.input_channels : arch_.conv_widths[l - 1];
        const int size = arch_.input_size >> l;
        const int p = size * size;
        const int pq = p / 4;
        const int k = in * 9;
        tap -= out;

        if (l == layers - 1) ws.d_pooled.assign(static_cast<std::size_t>(out) * pq, T(0));
        else ws.d_pooled.swap(ws.d_next);
        for (int o = 0; o < out; ++o)
            ws.d_pooled[static_cast<std::size_t>(o) * pq + ws.concat_arg[tap + o]] += ws.d_concat[tap + o];

        // Only the pooling winners carry gradient.
        const T* w = params_.data() + blocks_[2 * l].offset;
        T* g_w = grad.data() + blocks_[2 * l].offset;
        T* g_b = grad.data() + blocks_[2 * l + 1].offset;
        const auto& act = ws.act[l];
        transpose(ws.col[l], k, p, ws.col_rows);
        const auto& col = ws.col_rows;
        const bool need_input_grad = l > 0;
        if (need_input_grad) ws.d_col.assign(static_cast<std::size_t>(p) * k, T(0));
        for (int o = 0; o < out; ++o) {
            T* g_wo_l = g_w + static_cast<std::size_t>(o) * k;
            const T* w_o = w + static_cast<std::size_t>(o) * k;
            for (int t = 0; t < pq; ++t) {
                const std::size_t src = static_cast<std::size_t>(o) * pq + t;
                const T dp = ws.d_pooled[src];
                if (dp == T(0)) continue;
                const std::size_t q = ws.pool_arg[l][src];
                const T a = act[static_cast<std::size_t>(o) * p + q];
                const T dz = dp * (T(1) - a * a);
                g_b[o] += dz;
                axpy(dz, col.data() + q * k, g_wo_l, k);
                if (need_input_grad) axpy(dz, w_o, ws.d_col.data() + q * k, k);
            }
        }
        if (need_input_grad) col2im(ws.d_col, in, size, ws.d_next);
    }
}

template class Network<float>;
template class Network<double>;

namespace {

template <typename T>
double regularization_value(const Network<T>& net, const Regularization& reg)
{
    if (reg.l1 == 0.0 && reg.l2 == 0.0) return 0.0;
    double s1 = 0.0, s2 = 0.0;
    const auto p = net.parameters();
    for (const auto& b : net.blocks()) {
        if (!b.is_kernel) continue;
        for (std::size_t i = 0; i < b.size; ++i) {
            const double w = p[b.offset + i];
            s1 += std::abs(w);
            s2 += w * w;
        }
    }
    return reg.l1 * s1 + reg.l2 * s2;
}

template <typename T>
void add_regularization_grad(const Network<T>& net, const Regularization& reg, std::vector<T>& grad)
{
    if (reg.l1 == 0.0 && reg.l2 == 0.0) return;
    const auto p = net.parameters();
    for (const auto& b : net.blocks()) {
        if (!b.is_kernel) continue;
        for (std::size_t i = 0; i < b.size; ++i) {
            const double w = p[b.offset + i];
            const double sign = w > 0 ? 1.0 : (w < 0 ? -1.0 : 0.0);
            grad[b.offset + i] += static_cast<T>(reg.l1 * sign + 2.0 * reg.l2 * w);
        }
    }
}

template <typename T>
void check_batch(const Network<T>& net, std::span<const Example<T>> batch)
{
    require(!batch.empty(), "batch must not be empty");
    for (const auto& ex : batch) {
        require(ex.input.size() == net.input_length(), "example input has the wrong length");
        require(ex.label.size() == static_cast<std::size_t>(net.architecture().outputs), "example label has the wrong length");
    }
}

template <typename T>
double squared_error(const std::vector<T>& out, std::span<const T> label)
{
    double s = 0.0;
    for (std::size_t j = 0; j < out.size(); ++j) {
        const double e = static_cast<double>(out[j]) - static_cast<double>(label[j]);
        s += e * e;
    }
    return s;
}

template <typename T>
void output_gradient(const std::vector<T>& out, std::span<const T> label, double scale, std::vector<T>& d)
{
    d.resize(out.size());
    for (std::size_t j = 0; j < out.size(); ++j)
        d[j] = static_cast<T>(scale * (static_cast<double>(out[j]) - static_cast<double>(label[j])));
}

// Buffers reused across calls made from the same thread.
template <typename T>
struct BatchScratch {
    std::vector<Workspace<T>> workspaces;
    std::vector<std::vector<T>> grads;
    std::vector<std::vector<T>> d_out;
};

template <typename T>
BatchScratch<T>& batch_scratch()
{
    thread_local BatchScratch<T> scratch;
    return scratch;
}

// Each sample is back-propagated with the raw error as upstream gradient;
// the RMS chain factor 1 / (count * loss) is applied once after the
// sample-ordered reduction.
template <typename T>
LossAndGrad<T> loss_and_grad_impl(const Network<T>& net, std::span<const Example<T>> batch, const Regularization& reg,
                                  bool parallel)
{
    check_batch(net, batch);
    const std::ptrdiff_t b = static_cast<std::ptrdiff_t>(batch.size());
    const int n = net.architecture().outputs;
    const std::size_t np = net.parameter_count();
    auto& scratch = batch_scratch<T>();
    const int threads = parallel ? std::max(1, omp_get_max_threads()) : 1;
    if (static_cast<int>(scratch.workspaces.size()) < threads) scratch.workspaces.resize(threads);
    if (scratch.grads.size() < batch.size()) {
        scratch.grads.resize(batch.size());
        scratch.d_out.resize(batch.size());
    }
    std::vector<double> sq(batch.size());

    auto one = [&](std::ptrdiff_t i, Workspace<T>& ws) {
        net.forward(batch[i].input, ws);
        sq[i] = squared_error(ws.output, batch[i].label);
        auto& d = scratch.d_out[i];
        output_gradient(ws.output, batch[i].label, 1.0, d);
        auto& g = scratch.grads[i];
        g.assign(np, T(0));
        net.backward(batch[i].input, ws, d, g);
    };
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t i = 0; i < b; ++i) one(i, scratch.workspaces[omp_get_thread_num()]);
    } else {
        for (std::ptrdiff_t i = 0; i < b; ++i) one(i, scratch.workspaces[0]);
    }

    const double count = static_cast<double>(b) * n;
    const double data_loss = std::sqrt(std::accumulate(sq.begin(), sq.end(), 0.0) / count);
    LossAndGrad<T> r;
    r.data_loss = data_loss;
    r.loss = data_loss + regularization_value(net, reg);
    r.grad.assign(np, T(0));
    if (data_loss > 0.0) {
        const T scale = static_cast<T>(1.0 / (count * data_loss));
        const std::ptrdiff_t len = static_cast<std::ptrdiff_t>(np);
        auto reduce = [&](std::ptrdiff_t j) {
            T acc = 0;
            for (std::ptrdiff_t i = 0; i < b; ++i) acc += scratch.grads[i][j];
            r.grad[j] = acc * scale;
        };
        if (parallel) {
#pragma omp parallel for schedule(static)
            for (std::ptrdiff_t j = 0; j < len; ++j) reduce(j);
        } else {
            for (std::ptrdiff_t j = 0; j < len; ++j) reduce(j);
        }
    }
    add_regularization_grad(net, reg, r.grad);
    return r;
}

} // namespace

template <typename T>
LossAndGrad<T> loss_and_grad_serial(const Network<T>& net, std::span<const Example<T>> batch, const Regularization& reg)
{
    return loss_and_grad_impl(net, batch, reg, false);
}

template <typename T>
LossAndGrad<T> loss_and_grad(const Network<T>& net, std::span<const Example<T>> batch, const Regularization& reg)
{
    return loss_and_grad_impl(net, batch, reg, true);
}

template <typename T>
double batch_loss(const Network<T>& net, std::span<const Example<T>> batch, const Regularization& reg)
{
    check_batch(net, batch);
    double s = 0.0;
    Workspace<T> ws;
    for (const auto& ex : batch) {
        net.forward(ex.input, ws);
        s += squared_error(ws.output, ex.label);
    }
    return std::sqrt(s / (static_cast<double>(batch.size()) * net.architecture().outputs)) + regularization_value(net, reg);
}

template <typename T>
void adamw_step(Network<T>& net, TrainState<T>& state, std::span<const T> grad)
{
    const auto params = net.parameters();
    require(grad.size() == params.size(), "gradient length does not match the network");
    if (state.m.size() != params.size()) state.m.assign(params.size(), T(0));
    if (state.v.size() != params.size()) state.v.assign(params.size(), T(0));
    const Hyper& hp = state.hyper;
    ++state.step;
    const double c1 = 1.0 - std::pow(hp.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(hp.beta2, static_cast<double>(state.step));
    const T decay = static_cast<T>(1.0 - hp.learning_rate * hp.weight_decay);
    const T b1 = static_cast<T>(hp.beta1), b2 = static_cast<T>(hp.beta2);
    const T lr = static_cast<T>(hp.learning_rate), eps = static_cast<T>(hp.eps);
    const T ic1 = static_cast<T>(1.0 / c1), ic2 = static_cast<T>(1.0 / c2);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const T g = grad[i];
        state.m[i] = b1 * state.m[i] + (T(1) - b1) * g;
        state.v[i] = b2 * state.v[i] + (T(1) - b2) * g * g;
        const T mh = state.m[i] * ic1;
        const T vh = state.v[i] * ic2;
        params[i] = params[i] * decay - lr * mh / (std::sqrt(vh) + eps);
    }
}

#define MLAO_INSTANTIATE(T)                                                                                          \
    template LossAndGrad<T> loss_and_grad_serial<T>(const Network<T>&, std::span<const Example<T>>,                 \
                                                    const Regularization&);                                         \
    template LossAndGrad<T> loss_and_grad<T>(const Network<T>&, std::span<const Example<T>>, const Regularization&); \
    template double batch_loss<T>(const Network<T>&, std::span<const Example<T>>, const Regularization&);           \
    template void adamw_step<T>(Network<T>&, TrainState<T>&, std::span<const T>);

MLAO_INSTANTIATE(float)
MLAO_INSTANTIATE(double)
#undef MLAO_INSTANTIATE

Network<float> init_network(Rng& rng, int input_channels, int n_modes)
{
    const auto arch = Architecture::standard(input_channels, n_modes);
    arch.validate();
    const auto count = arch.parameter_count();
    if (count < kMinParameters || count > kMaxParameters) {
        std::ostringstream msg;
        msg << "network with " << input_channels << " input channels and " << n_modes << " outputs has " << count
            << " parameters, outside [" << kMinParameters << ", " << kMaxParameters << "]";
        throw std::invalid_argument(msg.str());
    }
    return Network<float>::glorot(rng, arch);
}

NetworkModel init_model(Rng& rng, const CorrectionScheme& scheme)
{
    NetworkModel m;
    m.network = init_network(rng, scheme.images_per_cycle(), scheme.n_modes());
    m.scheme_tag = scheme.tag;
    m.corrected_modes = scheme.corrected_modes;
    return m;
}

ZernikeVector forward(const NetworkModel& model, const PseudoStack& stack)
{
    require(stack.channel_count() == model.input_channels(), "pseudo-PSF stack has " +
                                                                  std::to_string(stack.channel_count()) +
                                                                  " channels but the model expects " +
                                                                  std::to_string(model.input_channels()));
    const auto flat = stack.flatten();
    std::vector<float> in(flat.begin(), flat.end());
    const auto out = model.network.forward(in);
    std::vector<double> values(out.begin(), out.end());
    return ZernikeVector::from_values(model.corrected_modes, values);
}

void save_model(const std::filesystem::path& path, const NetworkModel& model)
{
    const auto& a = model.network.architecture();
    require(static_cast<int>(model.corrected_modes.size()) == a.outputs, "corrected mode list does not match network outputs");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(kModelMagic, sizeof kModelMagic);
    binary::put_u32(out, kModelVersion);
    binary::put_u32(out, static_cast<std::uint32_t>(a.input_channels));
    binary::put_u32(out, static_cast<std::uint32_t>(a.outputs));
    binary::put_i32(out, static_cast<std::int32_t>(model.scheme_tag));
    for (int m : model.corrected_modes) binary::put_u32(out, static_cast<std::uint32_t>(m));
    binary::put_u32(out, static_cast<std::uint32_t>(a.input_size));
    binary::put_u32(out, static_cast<std::uint32_t>(a.conv_widths.size()));
    for (int w : a.conv_widths) binary::put_u32(out, static_cast<std::uint32_t>(w));
    binary::put_u32(out, static_cast<std::uint32_t>(a.hidden));
    const auto p = model.network.parameters();
    binary::put_u64(out, p.size());
    for (float v : p) binary::put_f32(out, v);
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

NetworkModel load_model(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open model file " + path.string());
    char magic[8];
    binary::read_exact(in, magic, 8, "model magic");
    if (!std::equal(magic, magic + 8, kModelMagic)) throw FormatError(path.string() + " is not a model file");
    if (binary::get_u32(in, "model version") != kModelVersion) throw FormatError("unsupported model file version");

    Architecture a;
    a.input_channels = static_cast<int>(binary::get_u32(in, "input channels"));
    a.outputs = static_cast<int>(binary::get_u32(in, "output count"));
    const auto tag = binary::get_i32(in, "scheme tag");
    if (tag < 0 || tag > 3) throw FormatError("model file has an unknown scheme tag");
    if (a.outputs < 1 || a.outputs > 1000 || a.input_channels < 1 || a.input_channels > 10000)
        throw FormatError("model file header is corrupt");
    NetworkModel m;
    m.scheme_tag = static_cast<SchemeTag>(tag);
    for (int i = 0; i < a.outputs; ++i) m.corrected_modes.push_back(static_cast<int>(binary::get_u32(in, "corrected modes")));
    a.input_size = static_cast<int>(binary::get_u32(in, "input size"));
    const auto layers = binary::get_u32(in, "layer count");
    if (layers < 1 || layers > 16) throw FormatError("model file header is corrupt");
    a.conv_widths.clear();
    for (std::uint32_t i = 0; i < layers; ++i) a.conv_widths.push_back(static_cast<int>(binary::get_u32(in, "conv widths")));
    a.hidden = static_cast<int>(binary::get_u32(in, "hidden width"));
    try {
        a.validate();
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("model file describes an invalid network: ") + e.what());
    }
    const auto count = binary::get_u64(in, "parameter count");
    if (count != a.parameter_count()) throw FormatError("model parameter count does not match its layer dimensions");
    m.network = Network<float>(a);
    auto p = m.network.parameters();
    for (auto& v : p) v = binary::get_f32(in, "parameters");
    return m;
}

NetworkModel load_model(const std::filesystem::path& path, const CorrectionScheme& expected)
{
    auto m = load_model(path);
    if (m.n_modes() != expected.n_modes())
        throw FormatError("model predicts N=" + std::to_string(m.n_modes()) + " modes but the evaluation context expects N=" +
                          std::to_string(expected.n_modes()));
    if (m.input_channels() != expected.images_per_cycle())
        throw FormatError("model expects " + std::to_string(m.input_channels()) +
                          " input channels but the scheme provides " + std::to_string(expected.images_per_cycle()));
    if (m.scheme_tag != expected.tag)
        throw FormatError("model was trained for scheme " + to_string(m.scheme_tag) + ", not " + to_string(expected.tag));
    if (m.corrected_modes != expected.corrected_modes)
        throw FormatError("model corrects modes " + format_mode_list(m.corrected_modes) + ", not " +
                          format_mode_list(expected.corrected_modes));
    return m;
}

} // namespace mlao
