#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pdeconv/fft.hpp"
#include "pdeconv/image.hpp"
#include "pdeconv/rng.hpp"

namespace pdeconv {
namespace detail {

inline void fill_rect(ImageGrid& img, int r0, int c0, int r1, int c1, double v) {
    for (int r = std::max(0, r0); r < std::min(img.height(), r1); ++r)
        for (int c = std::max(0, c0); c < std::min(img.width(), c1); ++c) img(r, c) = v;
}

inline void fill_disk(ImageGrid& img, double cr, double cc, double radius, double v) {
    for (int r = 0; r < img.height(); ++r)
        for (int c = 0; c < img.width(); ++c) {
            const double dr = r - cr, dc = c - cc;
            if (dr * dr + dc * dc <= radius * radius) img(r, c) = v;
        }
}

/// Smooth random field with a 1/f-style spectrum, rescaled to [lo, hi].
inline ImageGrid pink_field(int n, std::uint64_t seed, double gamma, double lo, double hi) {
    Rng rng(seed);
    ImageGrid noise(n, n);
    for (double& v : noise.pixels()) v = rng.normal();
    std::vector<cplx> spec = fft2(noise);
    for (int i = 0; i < n; ++i) {
        const double fi = i <= n / 2 ? i : i - n;
        for (int j = 0; j < n; ++j) {
            const double fj = j <= n / 2 ? j : j - n;
            const double f = std::sqrt(fi * fi + fj * fj);
            spec[static_cast<std::size_t>(i) * n + j] *= 1.0 / std::pow(1.0 + f, gamma);
        }
    }
    ImageGrid field = ifft2_real(n, n, spec);
    double mn = field.pixels()[0], mx = field.pixels()[0];
    for (double v : field.pixels()) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    const double span = mx - mn > 0 ? mx - mn : 1.0;
    for (double& v : field.pixels()) v = lo + (hi - lo) * (v - mn) / span;
    return field;
}

} // namespace detail

inline constexpr int suite_size = 10;
inline constexpr int suite_dim = 128;

/// Deterministic 128x128 test image, index 0..9: piecewise-constant
/// cartoons, gradients, periodic textures, and smooth random fields. These
/// are the bundled desk-scale stand-ins for a natural-image test set.
inline ImageGrid make_suite_image(int index) {
    const int n = suite_dim;
    ImageGrid img(n, n, 0.5);
    auto clampv = [](double v) { return std::min(std::max(v, 0.0), 1.0); };
    switch (index) {
        case 0: { // cartoon: flat shapes on a flat background
            detail::fill_rect(img, 0, 0, n, n, 0.25);
            detail::fill_rect(img, 12, 16, 60, 72, 0.70);
            detail::fill_rect(img, 70, 30, 118, 58, 0.45);
            detail::fill_disk(img, 40.0, 96.0, 20.0, 0.90);
            detail::fill_disk(img, 95.0, 95.0, 14.0, 0.10);
            break;
        }
        case 1: { // diagonal gradient with embedded shapes
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) img(r, c) = 0.1 + 0.8 * (r + c) / (2.0 * (n - 1));
            detail::fill_disk(img, 44.0, 44.0, 18.0, 0.85);
            detail::fill_rect(img, 80, 76, 112, 116, 0.15);
            break;
        }
        case 2: { // coarse checkerboard with a bright disk
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) img(r, c) = ((r / 16 + c / 16) % 2 == 0) ? 0.30 : 0.70;
            detail::fill_disk(img, 64.0, 64.0, 22.0, 0.95);
            break;
        }
        case 3: { // sinusoidal texture mix
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) {
                    const double x = c / static_cast<double>(n), y = r / static_cast<double>(n);
                    const double v = 0.5 + 0.22 * std::sin(2.0 * M_PI * (4.0 * x + 1.5 * y)) +
                                     0.18 * std::sin(2.0 * M_PI * 7.0 * y) * std::cos(2.0 * M_PI * 2.0 * x);
                    img(r, c) = clampv(v);
                }
            break;
        }
        case 4: // smooth natural-statistics field
            return detail::pink_field(n, 0xA5EED001, 1.6, 0.08, 0.92);
        case 5: { // Gaussian blobs
            detail::fill_rect(img, 0, 0, n, n, 0.20);
            Rng rng(0xB10B5EED);
            for (int b = 0; b < 12; ++b) {
                const double cr = rng.uniform() * n, cc = rng.uniform() * n;
                const double s = 4.0 + 12.0 * rng.uniform();
                const double amp = 0.25 + 0.55 * rng.uniform();
                for (int r = 0; r < n; ++r)
                    for (int c = 0; c < n; ++c) {
                        const double d2 = (r - cr) * (r - cr) + (c - cc) * (c - cc);
                        img(r, c) = clampv(img(r, c) + amp * std::exp(-d2 / (2.0 * s * s)));
                    }
            }
            break;
        }
        case 6: { // bar pattern with a diagonal band
            int c = 0, width = 2;
            double v = 0.15;
            while (c < n) {
                detail::fill_rect(img, 0, c, n, c + width, v);
                c += width;
                width = width % 10 + 2;
                v = v > 0.5 ? 0.15 : 0.85;
            }
            for (int r = 0; r < n; ++r)
                for (int cc2 = 0; cc2 < n; ++cc2)
                    if (std::abs(r - cc2) < 6) img(r, cc2) = 0.5;
            break;
        }
        case 7: { // chirped rings
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) {
                    const double d = std::sqrt((r - 64.0) * (r - 64.0) + (c - 64.0) * (c - 64.0));
                    img(r, c) = clampv(0.5 + 0.4 * std::cos(2.0 * M_PI * d * d / 700.0));
                }
            break;
        }
        case 8: { // smooth field with two flat occluders
            img = detail::pink_field(n, 0xC0FFEE42, 1.4, 0.10, 0.90);
            detail::fill_rect(img, 20, 18, 58, 52, 0.85);
            detail::fill_disk(img, 92.0, 88.0, 19.0, 0.12);
            break;
        }
        case 9: { // step wedge plus fine texture half
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) img(r, c) = 0.1 + 0.2 * (c / 26);
            for (int r = 64; r < n; ++r)
                for (int c = 0; c < n; ++c)
                    img(r, c) = clampv(img(r, c) + (((r / 2 + c / 2) % 2 == 0) ? 0.12 : -0.12));
            detail::fill_disk(img, 32.0, 96.0, 15.0, 0.92);
            break;
        }
        default:
            throw DomainError("make_suite_image: index outside 0.." + std::to_string(suite_size - 1));
    }
    return img;
}

inline std::string suite_image_name(int index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "img%02d", index);
    return buf;
}

} // namespace pdeconv
