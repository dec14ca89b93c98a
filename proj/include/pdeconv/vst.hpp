#pragma once

#include <cmath>

#include "pdeconv/image.hpp"

namespace pdeconv {

/// Inverse of the Anscombe transform. The algebraic form is the exact left
/// inverse; the asymptotically unbiased form corrects the low-count bias of
/// the naive inversion.
enum class VstInverse { algebraic, asymptotically_unbiased };

struct VstConfig {
    VstInverse inverse_kind = VstInverse::algebraic;
};

/// Anscombe variance-stabilizing transform 2*sqrt(v + 3/8): maps Poisson
/// counts to approximately unit-variance Gaussian for rates that are not
/// too low (reliable from roughly 4 counts per pixel upward).
inline ImageGrid anscombe(const ImageGrid& counts) {
    ImageGrid out = counts;
    for (double& v : out.pixels()) {
        if (v < 0.0) throw DomainError("anscombe: counts must be nonnegative");
        v = 2.0 * std::sqrt(v + 0.375);
    }
    return out;
}

inline ImageGrid inverse_anscombe(const ImageGrid& stabilized, const VstConfig& config = {}) {
    const double offset = config.inverse_kind == VstInverse::algebraic ? 0.375 : 0.125;
    ImageGrid out = stabilized;
    for (double& t : out.pixels()) {
        const double half = t * 0.5;
        t = std::max(half * half - offset, 0.0);
    }
    return out;
}

} // namespace pdeconv
