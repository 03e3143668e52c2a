#include "mlao/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace mlao {

void BaselineConfig::validate() const
{
    require(!modes.empty(), "baseline needs at least one mode");
    require(bias_depth > 0.0, "bias depth must be positive");
    metric.validate();
}

MetricConfig BaselineConfig::default_metric(Modality modality)
{
    MetricConfig m;
    m.kind = modality == Modality::widefield ? MetricConfig::Kind::sharpness : MetricConfig::Kind::intensity;
    return m;
}

BaselineConfig BaselineConfig::for_modality(Variant variant, std::vector<int> modes, Modality modality, double bias_depth)
{
    BaselineConfig c;
    c.modes = std::move(modes);
    c.bias_depth = bias_depth;
    c.metric = default_metric(modality);
    c.variant = variant;
    return c;
}

ParabolicPeak parabolic_peak(double y_minus, double y_zero, double y_plus, double b)
{
    const double denom = 2.0 * (y_plus + y_minus - 2.0 * y_zero);
    if (!(denom < 0.0)) {
        if (y_minus > y_plus && y_minus > y_zero) return {-b, true};
        if (y_plus > y_minus && y_plus > y_zero) return {b, true};
        return {0.0, true};
    }
    const double c = b * (y_minus - y_plus) / denom;
    return {std::clamp(c, -2.0 * b, 2.0 * b), false};
}

namespace {

double measure(Acquisition& scope, const MetricConfig& metric, const ZernikeVector& bias)
{
    return evaluate_metric(scope.acquire(bias), metric);
}

ZernikeVector single(int mode, double value)
{
    ZernikeVector v;
    v.set(mode, value);
    return v;
}

} // namespace

ZernikeVector run_2n_plus_1(Acquisition& scope, const BaselineConfig& cfg)
{
    cfg.validate();
    const double b = cfg.bias_depth;
    const double y0 = measure(scope, cfg.metric, ZernikeVector{});
    ZernikeVector correction;
    for (int m : cfg.modes) {
        const double ym = measure(scope, cfg.metric, single(m, -b));
        const double yp = measure(scope, cfg.metric, single(m, b));
        correction.set(m, parabolic_peak(ym, y0, yp, b).value);
    }
    correction.correctable_set = cfg.modes;
    scope.apply_correction(correction);
    return correction;
}

ZernikeVector run_3n(Acquisition& scope, const BaselineConfig& cfg)
{
    cfg.validate();
    const double b = cfg.bias_depth;
    ZernikeVector total;
    for (int m : cfg.modes) {
        const double ym = measure(scope, cfg.metric, single(m, -b));
        const double y0 = measure(scope, cfg.metric, ZernikeVector{});
        const double yp = measure(scope, cfg.metric, single(m, b));
        const auto step = single(m, parabolic_peak(ym, y0, yp, b).value);
        scope.apply_correction(step);
        total += step;
    }
    total.correctable_set = cfg.modes;
    return total;
}

ZernikeVector run_baseline(Acquisition& scope, const BaselineConfig& cfg)
{
    return cfg.variant == BaselineConfig::Variant::two_n_plus_one ? run_2n_plus_1(scope, cfg) : run_3n(scope, cfg);
}

} // namespace mlao
