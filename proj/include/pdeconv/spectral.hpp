#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pdeconv/fft.hpp"
#include "pdeconv/image.hpp"

namespace pdeconv {
namespace detail {

/// Places taps into an h x w grid with the given origin offset and circular
/// wraparound, then transforms. Shared by blur kernels and feature stencils.
inline std::vector<cplx> spectrum_of_taps(int h, int w, int krows, int kcols,
                                          int origin_r, int origin_c,
                                          const std::vector<double>& taps) {
    ImageGrid padded(h, w, 0.0);
    for (int i = 0; i < krows; ++i) {
        for (int j = 0; j < kcols; ++j) {
            const int di = i - origin_r;
            const int dj = j - origin_c;
            const int r = ((di % h) + h) % h;
            const int c = ((dj % w) + w) % w;
            padded(r, c) += taps[static_cast<std::size_t>(i) * kcols + j];
        }
    }
    return fft2(padded);
}

} // namespace detail

/// Transfer function of a blur kernel on a fixed image shape: F(H) and
/// |F(H)|^2, reusable across every solver call at that shape.
struct SpectralKernel {
    int height = 0;
    int width = 0;
    std::vector<cplx> transfer;
    std::vector<double> power;
};

inline SpectralKernel precompute_kernel(const BlurKernel& kernel, int height, int width) {
    if (kernel.size() > height || kernel.size() > width)
        throw ShapeError("precompute_kernel: kernel " + std::to_string(kernel.size()) +
                         " exceeds image " + std::to_string(height) + "x" + std::to_string(width));
    SpectralKernel sk;
    sk.height = height;
    sk.width = width;
    sk.transfer = detail::spectrum_of_taps(height, width, kernel.size(), kernel.size(),
                                           kernel.radius(), kernel.radius(), kernel.taps());
    sk.power.resize(sk.transfer.size());
    for (std::size_t i = 0; i < sk.transfer.size(); ++i) sk.power[i] = std::norm(sk.transfer[i]);
    return sk;
}

namespace detail {

inline void require_kernel_shape(const ImageGrid& img, const SpectralKernel& hk, const char* where) {
    if (img.height() != hk.height || img.width() != hk.width)
        throw ShapeError(std::string(where) + ": image does not match the precomputed kernel shape");
}

} // namespace detail

/// Regularized Fourier inverse (H^T H + lambda I)^-1 H^T y. With lambda = 0
/// the kernel spectrum must not vanish anywhere.
inline ImageGrid wiener(const ImageGrid& y, const SpectralKernel& hk, double lambda) {
    detail::require_kernel_shape(y, hk, "wiener");
    if (lambda < 0.0) throw DomainError("wiener: lambda must be nonnegative");
    if (lambda == 0.0) {
        double min_power = hk.power.empty() ? 0.0 : hk.power[0];
        for (double p : hk.power) min_power = std::min(min_power, p);
        if (min_power < 1e-12)
            throw SingularityError("wiener: lambda=0 with a vanishing kernel spectrum (min |F(H)|^2 = " +
                                   std::to_string(min_power) + ")");
    }
    std::vector<cplx> spec = fft2(y);
    for (std::size_t i = 0; i < spec.size(); ++i)
        spec[i] = std::conj(hk.transfer[i]) * spec[i] / (hk.power[i] + lambda);
    return ifft2_real(hk.height, hk.width, spec);
}

/// Which term the penalty multiplies in the feature-space data step. The
/// default puts it on the data-fidelity term; the alternative weighting is
/// kept for the ablation harness.
enum class HqsWeighting { data_side, prior_side };

/// Closed-form z-update of the feature-space HQS iteration:
///   argmin_z ||z - feat_prev||^2 + mu * ||H z - feat_obs||^2   (data_side)
/// solved exactly in the Fourier domain under circular boundaries.
inline ImageGrid hqs_data_step(const ImageGrid& feat_prev, const ImageGrid& feat_obs,
                               const SpectralKernel& hk, double mu,
                               HqsWeighting weighting = HqsWeighting::data_side) {
    require_same_shape(feat_prev, feat_obs, "hqs_data_step");
    detail::require_kernel_shape(feat_prev, hk, "hqs_data_step");
    if (mu < 0.0) throw DomainError("hqs_data_step: mu must be nonnegative");
    if (mu == 0.0 && weighting == HqsWeighting::data_side) return feat_prev;

    std::vector<cplx> prev = fft2(feat_prev);
    const std::vector<cplx> obs = fft2(feat_obs);
    if (weighting == HqsWeighting::data_side) {
        for (std::size_t i = 0; i < prev.size(); ++i)
            prev[i] = (prev[i] + mu * std::conj(hk.transfer[i]) * obs[i]) / (1.0 + mu * hk.power[i]);
    } else {
        if (mu == 0.0) throw DomainError("hqs_data_step: prior-side weighting requires mu > 0");
        for (std::size_t i = 0; i < prev.size(); ++i)
            prev[i] = (mu * prev[i] + std::conj(hk.transfer[i]) * obs[i]) / (mu + hk.power[i]);
    }
    return ifft2_real(hk.height, hk.width, prev);
}

/// The objective the data_side step minimizes; used by diagnostics and tests.
inline double hqs_data_objective(const ImageGrid& z, const ImageGrid& feat_prev,
                                 const ImageGrid& feat_obs, const SpectralKernel& hk, double mu) {
    require_same_shape(z, feat_prev, "hqs_data_objective");
    detail::require_kernel_shape(z, hk, "hqs_data_objective");
    std::vector<cplx> zs = fft2(z);
    for (std::size_t i = 0; i < zs.size(); ++i) zs[i] *= hk.transfer[i];
    const ImageGrid hz = ifft2_real(hk.height, hk.width, zs);
    double prior = 0.0, data = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double dp = z.pixels()[i] - feat_prev.pixels()[i];
        const double dd = hz.pixels()[i] - feat_obs.pixels()[i];
        prior += dp * dp;
        data += dd * dd;
    }
    return prior + mu * data;
}

/// Proximal inversion step (H^T H + rho I)^-1 (H^T y + rho x_prev): a Wiener
/// filter anchored at the previous estimate.
inline ImageGrid inversion_module(const ImageGrid& y, const ImageGrid& x_prev,
                                  const SpectralKernel& hk, double rho) {
    require_same_shape(y, x_prev, "inversion_module");
    detail::require_kernel_shape(y, hk, "inversion_module");
    if (rho <= 0.0) throw DomainError("inversion_module: rho must be positive");
    std::vector<cplx> ys = fft2(y);
    const std::vector<cplx> xs = fft2(x_prev);
    for (std::size_t i = 0; i < ys.size(); ++i)
        ys[i] = (std::conj(hk.transfer[i]) * ys[i] + rho * xs[i]) / (hk.power[i] + rho);
    return ifft2_real(hk.height, hk.width, ys);
}

} // namespace pdeconv
