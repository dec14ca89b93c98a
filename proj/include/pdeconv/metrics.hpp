#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "pdeconv/image.hpp"

namespace pdeconv {

inline double mse(const ImageGrid& a, const ImageGrid& b) {
    require_same_shape(a, b, "mse");
    double acc = 0.0;
    const auto& pa = a.pixels();
    const auto& pb = b.pixels();
    for (std::size_t i = 0; i < pa.size(); ++i) {
        const double d = pa[i] - pb[i];
        acc += d * d;
    }
    return acc / static_cast<double>(pa.size());
}

/// Peak signal-to-noise ratio against dynamic range 1. Identical images
/// report the 100 dB cap instead of infinity.
inline double psnr(const ImageGrid& reference, const ImageGrid& estimate) {
    const double e = mse(reference, estimate);
    if (e == 0.0) return 100.0;
    return 10.0 * std::log10(1.0 / e);
}

namespace detail {

inline const std::array<double, 11 * 11>& ssim_window() {
    static const std::array<double, 11 * 11> w = [] {
        std::array<double, 11 * 11> g{};
        const double sigma = 1.5;
        double sum = 0.0;
        for (int i = 0; i < 11; ++i)
            for (int j = 0; j < 11; ++j) {
                const double di = i - 5, dj = j - 5;
                g[static_cast<std::size_t>(i) * 11 + j] = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
                sum += g[static_cast<std::size_t>(i) * 11 + j];
            }
        for (double& v : g) v /= sum;
        return g;
    }();
    return w;
}

} // namespace detail

/// Mean local SSIM, 11x11 Gaussian window (sigma 1.5), C1=(0.01)^2,
/// C2=(0.03)^2, dynamic range 1. Windows are evaluated on the valid
/// interior only, so both dimensions must be at least 11.
inline double ssim(const ImageGrid& reference, const ImageGrid& estimate) {
    require_same_shape(reference, estimate, "ssim");
    const int h = reference.height(), w = reference.width();
    if (h < 11 || w < 11)
        throw ShapeError("ssim: image must be at least 11x11, got " +
                         std::to_string(h) + "x" + std::to_string(w));

    const auto& win = detail::ssim_window();
    const double c1 = 0.01 * 0.01;
    const double c2 = 0.03 * 0.03;

    double acc = 0.0;
    long count = 0;
    for (int r = 0; r + 11 <= h; ++r) {
        for (int c = 0; c + 11 <= w; ++c) {
            double mu1 = 0.0, mu2 = 0.0, s11 = 0.0, s22 = 0.0, s12 = 0.0;
            for (int i = 0; i < 11; ++i)
                for (int j = 0; j < 11; ++j) {
                    const double g = win[static_cast<std::size_t>(i) * 11 + j];
                    const double x = reference(r + i, c + j);
                    const double y = estimate(r + i, c + j);
                    mu1 += g * x;
                    mu2 += g * y;
                    s11 += g * x * x;
                    s22 += g * y * y;
                    s12 += g * x * y;
                }
            const double var1 = s11 - mu1 * mu1;
            const double var2 = s22 - mu2 * mu2;
            const double cov = s12 - mu1 * mu2;
            acc += ((2.0 * mu1 * mu2 + c1) * (2.0 * cov + c2)) /
                   ((mu1 * mu1 + mu2 * mu2 + c1) * (var1 + var2 + c2));
            ++count;
        }
    }
    return acc / static_cast<double>(count);
}

/// Poisson negative log-likelihood up to the observation-only constant:
/// sum_p [ intensity_p - observation_p * log(intensity_p) ].
inline double poisson_nll(const ImageGrid& observation, const ImageGrid& intensity) {
    require_same_shape(observation, intensity, "poisson_nll");
    double acc = 0.0;
    const auto& y = observation.pixels();
    const auto& lam = intensity.pixels();
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (lam[i] <= 0.0) throw DomainError("poisson_nll: intensity must be positive everywhere");
        if (y[i] < 0.0) throw DomainError("poisson_nll: observation must be nonnegative");
        acc += lam[i] - y[i] * std::log(lam[i]);
    }
    return acc;
}

/// Gaussian negative log-likelihood core: squared l2 distance.
inline double gaussian_nll(const ImageGrid& observation, const ImageGrid& intensity) {
    require_same_shape(observation, intensity, "gaussian_nll");
    double acc = 0.0;
    const auto& y = observation.pixels();
    const auto& m = intensity.pixels();
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - m[i];
        acc += d * d;
    }
    return acc;
}

inline QualityReport quality(const ImageGrid& reference, const ImageGrid& estimate) {
    QualityReport q;
    q.mse = mse(reference, estimate);
    q.psnr_db = q.mse == 0.0 ? 100.0 : 10.0 * std::log10(1.0 / q.mse);
    q.ssim = ssim(reference, estimate);
    return q;
}

} // namespace pdeconv
