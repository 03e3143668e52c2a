#include "mlao/simulation.hpp"

#include <algorithm>

namespace mlao {

OpticalSystem::OpticalSystem(int grid_size, double sampling_factor, Modality modality, std::vector<int> modes)
    : OpticalSystem(grid_size, sampling_factor, modality, Illumination::default_for(modality), std::move(modes))
{
}

OpticalSystem::OpticalSystem(int grid_size, double sampling_factor, Modality modality, Illumination illumination,
                             std::vector<int> modes)
    : pupil_(make_pupil(grid_size, sampling_factor, illumination, mlao::exponent(modality))),
      basis_(std::move(modes), grid_size, pupil_.radius_ratio),
      modality_(modality),
      sampling_factor_(sampling_factor)
{
    reference_ = render(ZernikeVector{});
    const double s = reference_.values.sum();
    if (!(s > 0.0)) throw DegenerateInputError("aberration-free PSF has no signal");
    scale_ = 1.0 / s;
    reference_.values *= scale_;
    reference_peak_ = reference_.values.max();
}

Psf OpticalSystem::render(const ZernikeVector& aberration) const
{
    Psf p = psf(pupil_, basis_.compose(aberration), exponent(), false);
    p.values *= scale_;
    p.sampling_factor = sampling_factor_;
    return p;
}

std::vector<int> merge_modes(std::initializer_list<std::span<const int>> lists)
{
    std::vector<int> out;
    for (auto l : lists) out.insert(out.end(), l.begin(), l.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace mlao
