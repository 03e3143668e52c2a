#pragma once

#include <string>
#include <vector>

#include "mlao/zernike.hpp"

namespace mlao {

enum class SchemeTag : int { ast2 = 0, ast4 = 1, two_n = 2, four_n = 3 };

SchemeTag scheme_tag_from_string(const std::string& s);
std::string to_string(SchemeTag t);

/// One (+depth, -depth) pair of biased acquisitions on a single mode.
struct BiasPair {
    int mode;
    double depth;
};

/// Biasing configuration: which modes are biased, at which depths, and which
/// modes are corrected.
///
///   ast2:   M = 2,  bias mode 5, depths +-1
///   ast4:   M = 4,  bias mode 5, depths +-0.5, +-1
///   two_n:  M = 2N, every corrected mode, +-1
///   four_n: M = 4N, every corrected mode, +-0.5 and +-1
///
/// Acquisition order is pair by pair, each pair as (+depth, -depth); pairs
/// iterate over bias modes (outer) and depths in ascending order (inner).
struct CorrectionScheme {
    SchemeTag tag = SchemeTag::ast2;
    std::vector<int> bias_modes;
    std::vector<double> bias_depths;
    std::vector<int> corrected_modes;

    int images_per_cycle() const { return static_cast<int>(2 * bias_modes.size() * bias_depths.size()); }
    int n_modes() const { return static_cast<int>(corrected_modes.size()); }

    std::vector<BiasPair> pairs() const;
    /// Bias vectors in acquisition order (length images_per_cycle()).
    std::vector<ZernikeVector> biases() const;
};

CorrectionScheme make_scheme(SchemeTag tag, std::vector<int> corrected_modes);

/// Noll 5-8 and 11, the five-mode desk configuration.
std::vector<int> default_corrected_modes();

/// Parses "5-8,11" style lists.
std::vector<int> parse_mode_list(const std::string& s);
std::string format_mode_list(const std::vector<int>& modes);

} // namespace mlao
