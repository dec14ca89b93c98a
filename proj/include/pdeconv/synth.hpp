#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pdeconv/image.hpp"
#include "pdeconv/rng.hpp"
#include "pdeconv/spectral.hpp"

namespace pdeconv {

/// One synthetic observation: blur kernel plus photon level; the seed fully
/// determines the sampled counts.
struct DegradationSpec {
    BlurKernel kernel;
    double ppp = 10.0;
    std::uint64_t seed = 0;
};

namespace detail {

inline std::vector<double> sampled_gaussian_taps(int size, double sigma_x, double sigma_y, double theta) {
    const int r = size / 2;
    const double ct = std::cos(theta), st = std::sin(theta);
    std::vector<double> taps(static_cast<std::size_t>(size) * size);
    for (int i = 0; i < size; ++i) {
        for (int j = 0; j < size; ++j) {
            const double dy = i - r, dx = j - r;
            const double u = ct * dx + st * dy;
            const double v = -st * dx + ct * dy;
            taps[static_cast<std::size_t>(i) * size + j] =
                std::exp(-0.5 * (u * u / (sigma_x * sigma_x) + v * v / (sigma_y * sigma_y)));
        }
    }
    return taps;
}

} // namespace detail

/// Anisotropic Gaussian blur sampled on the tap grid, rotated by theta and
/// normalized to unit mass.
inline BlurKernel make_gaussian_kernel(int size, double sigma_x, double sigma_y, double theta) {
    if (size <= 0 || size % 2 == 0) throw DomainError("make_gaussian_kernel: size must be odd");
    if (sigma_x < 0.1 || sigma_x > 5.0 || sigma_y < 0.1 || sigma_y > 5.0)
        throw DomainError("make_gaussian_kernel: sigma outside [0.1, 5]");
    return BlurKernel::normalized(size, detail::sampled_gaussian_taps(size, sigma_x, sigma_y, theta));
}

/// Motion-blur stand-in: a camera path with Gaussian velocity increments
/// scaled by `jitter`, splatted with bilinear weights into the k x k support
/// (samples outside are clipped), then normalized. jitter = 0 leaves all
/// mass at the path start (the center cell).
inline BlurKernel make_trajectory_kernel(int size, int steps, double jitter, std::uint64_t seed) {
    if (size <= 0 || size % 2 == 0) throw DomainError("make_trajectory_kernel: size must be odd");
    if (steps < 2) throw DomainError("make_trajectory_kernel: steps must be >= 2");
    if (jitter < 0.0) throw DomainError("make_trajectory_kernel: jitter must be nonnegative");

    Rng rng(seed);
    std::vector<double> weights(static_cast<std::size_t>(size) * size, 0.0);
    const double center = size / 2;
    double px = 0.0, py = 0.0, vx = 0.0, vy = 0.0;
    for (int t = 0; t < steps; ++t) {
        const double gx = center + px;
        const double gy = center + py;
        const int j0 = static_cast<int>(std::floor(gx));
        const int i0 = static_cast<int>(std::floor(gy));
        const double fx = gx - j0;
        const double fy = gy - i0;
        const double w[4] = {(1 - fy) * (1 - fx), (1 - fy) * fx, fy * (1 - fx), fy * fx};
        const int ii[4] = {i0, i0, i0 + 1, i0 + 1};
        const int jj[4] = {j0, j0 + 1, j0, j0 + 1};
        for (int c = 0; c < 4; ++c)
            if (ii[c] >= 0 && ii[c] < size && jj[c] >= 0 && jj[c] < size)
                weights[static_cast<std::size_t>(ii[c]) * size + jj[c]] += w[c];
        vx += jitter * rng.normal();
        vy += jitter * rng.normal();
        px += vx;
        py += vy;
    }
    return BlurKernel::normalized(size, std::move(weights));
}

/// Default jitter that keeps the walk's RMS excursion near size/5 so most of
/// the mass lands inside the support.
inline double default_trajectory_jitter(int size, int steps) {
    return size * std::sqrt(3.0) / (5.0 * std::pow(static_cast<double>(steps), 1.5));
}

/// Circular (periodic) 2-D convolution, evaluated in the Fourier domain.
inline ImageGrid blur(const ImageGrid& x, const BlurKernel& kernel) {
    if (kernel.size() > x.height() || kernel.size() > x.width())
        throw ShapeError("blur: kernel larger than image");
    const SpectralKernel hk = precompute_kernel(kernel, x.height(), x.width());
    std::vector<cplx> spec = fft2(x);
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= hk.transfer[i];
    return ifft2_real(x.height(), x.width(), spec);
}

inline ImageGrid blur(const ImageGrid& x, const SpectralKernel& hk) {
    detail::require_kernel_shape(x, hk, "blur");
    std::vector<cplx> spec = fft2(x);
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= hk.transfer[i];
    return ifft2_real(x.height(), x.width(), spec);
}

/// Photon level that makes the mean count of alpha * blurred equal ppp.
inline double alpha_for_ppp(const ImageGrid& blurred, double ppp) {
    if (ppp <= 0.0) throw DomainError("alpha_for_ppp: ppp must be positive");
    const double m = mean(blurred);
    if (m <= 0.0) throw DomainError("alpha_for_ppp: blurred image has nonpositive mean");
    return ppp / m;
}

/// Independent per-pixel Poisson counts, fully determined by the seed.
inline ImageGrid sample_poisson(const ImageGrid& intensity, std::uint64_t seed) {
    Rng rng(seed);
    ImageGrid out(intensity.height(), intensity.width(), 0.0);
    for (std::size_t i = 0; i < intensity.size(); ++i) {
        const double lam = intensity.pixels()[i];
        if (lam < 0.0) throw DomainError("sample_poisson: negative intensity");
        if (lam == 0.0) continue;
        out.pixels()[i] = static_cast<double>(rng.poisson(lam));
    }
    return out;
}

struct Degraded {
    ImageGrid counts;   // raw Poisson counts y
    double alpha = 1.0; // photon scale; y / alpha is the normalized observation
};

/// Blur, scale to the requested photon level, and draw shot noise:
/// y = Poisson(alpha * H x).
inline Degraded degrade(const ImageGrid& x, const DegradationSpec& spec) {
    for (double v : x.pixels())
        if (v < -1e-9 || v > 1.0 + 1e-9)
            throw DomainError("degrade: clean image must lie in [0,1]");
    ImageGrid blurred = clamp_nonneg(blur(x, spec.kernel));
    const double alpha = alpha_for_ppp(blurred, spec.ppp);
    for (double& v : blurred.pixels()) v *= alpha;
    return Degraded{sample_poisson(blurred, spec.seed), alpha};
}

} // namespace pdeconv
