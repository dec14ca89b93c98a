#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pdeconv/image.hpp"
#include "pdeconv/synth.hpp"

namespace pdeconv {

enum class DenoiserKind { identity, gaussian_smooth, tv_chambolle, haar_soft };

inline DenoiserKind parse_denoiser_kind(const std::string& name) {
    if (name == "identity") return DenoiserKind::identity;
    if (name == "gaussian_smooth") return DenoiserKind::gaussian_smooth;
    if (name == "tv_chambolle") return DenoiserKind::tv_chambolle;
    if (name == "haar_soft") return DenoiserKind::haar_soft;
    throw ConfigError("unknown denoiser kind '" + name + "'");
}

inline const char* denoiser_kind_name(DenoiserKind kind) {
    switch (kind) {
        case DenoiserKind::identity: return "identity";
        case DenoiserKind::gaussian_smooth: return "gaussian_smooth";
        case DenoiserKind::tv_chambolle: return "tv_chambolle";
        case DenoiserKind::haar_soft: return "haar_soft";
    }
    return "?";
}

/// Plug-in denoiser selection. `strength` is the Gaussian sigma, the TV
/// weight, or the wavelet threshold depending on the kind; zero strength is
/// the identity map for every kind.
struct DenoiserSpec {
    DenoiserKind kind = DenoiserKind::tv_chambolle;
    double strength = 0.0;
    int inner_iterations = 30;
};

/// One-level orthonormal 2-D Haar decomposition. Odd dimensions are padded
/// by edge replication; the inverse crops the padding away.
struct HaarBands {
    ImageGrid ll, lh, hl, hh;
    int orig_height = 0;
    int orig_width = 0;
};

inline HaarBands haar_transform(const ImageGrid& x) {
    const int oh = x.height(), ow = x.width();
    const int h = oh + (oh % 2), w = ow + (ow % 2);
    const int hh = h / 2, hw = w / 2;
    auto sample = [&](int r, int c) {
        return x(std::min(r, oh - 1), std::min(c, ow - 1));
    };
    HaarBands b{ImageGrid(hh, hw), ImageGrid(hh, hw), ImageGrid(hh, hw), ImageGrid(hh, hw), oh, ow};
    for (int i = 0; i < hh; ++i) {
        for (int j = 0; j < hw; ++j) {
            const double a00 = sample(2 * i, 2 * j);
            const double a01 = sample(2 * i, 2 * j + 1);
            const double a10 = sample(2 * i + 1, 2 * j);
            const double a11 = sample(2 * i + 1, 2 * j + 1);
            b.ll(i, j) = 0.5 * (a00 + a01 + a10 + a11);
            b.lh(i, j) = 0.5 * (a00 - a01 + a10 - a11);
            b.hl(i, j) = 0.5 * (a00 + a01 - a10 - a11);
            b.hh(i, j) = 0.5 * (a00 - a01 - a10 + a11);
        }
    }
    return b;
}

inline ImageGrid haar_inverse(const HaarBands& b) {
    const int hh = b.ll.height(), hw = b.ll.width();
    ImageGrid full(hh * 2, hw * 2);
    for (int i = 0; i < hh; ++i) {
        for (int j = 0; j < hw; ++j) {
            const double ll = b.ll(i, j), lh = b.lh(i, j), hl = b.hl(i, j), hhv = b.hh(i, j);
            full(2 * i, 2 * j) = 0.5 * (ll + lh + hl + hhv);
            full(2 * i, 2 * j + 1) = 0.5 * (ll - lh + hl - hhv);
            full(2 * i + 1, 2 * j) = 0.5 * (ll + lh - hl - hhv);
            full(2 * i + 1, 2 * j + 1) = 0.5 * (ll - lh - hl + hhv);
        }
    }
    if (full.height() == b.orig_height && full.width() == b.orig_width) return full;
    ImageGrid out(b.orig_height, b.orig_width);
    for (int i = 0; i < b.orig_height; ++i)
        for (int j = 0; j < b.orig_width; ++j) out(i, j) = full(i, j);
    return out;
}

inline double soft_threshold(double v, double tau) {
    if (v > tau) return v - tau;
    if (v < -tau) return v + tau;
    return 0.0;
}

/// Haar-domain soft thresholding of the detail bands; the approximation
/// band passes through unchanged.
inline ImageGrid haar_soft(const ImageGrid& x, double tau) {
    if (tau == 0.0) return x;
    if (tau < 0.0) throw DomainError("haar_soft: threshold must be nonnegative");
    HaarBands b = haar_transform(x);
    for (double& v : b.lh.pixels()) v = soft_threshold(v, tau);
    for (double& v : b.hl.pixels()) v = soft_threshold(v, tau);
    for (double& v : b.hh.pixels()) v = soft_threshold(v, tau);
    return haar_inverse(b);
}

namespace detail {

// Forward differences with Neumann boundary (zero gradient on the last
// row/column) and the matching negative-adjoint divergence.
inline void tv_gradient(const ImageGrid& u, std::vector<double>& gx, std::vector<double>& gy) {
    const int h = u.height(), w = u.width();
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            const std::size_t p = static_cast<std::size_t>(i) * w + j;
            gx[p] = j + 1 < w ? u(i, j + 1) - u(i, j) : 0.0;
            gy[p] = i + 1 < h ? u(i + 1, j) - u(i, j) : 0.0;
        }
}

inline double tv_divergence_at(const std::vector<double>& px, const std::vector<double>& py,
                               int h, int w, int i, int j) {
    const std::size_t p = static_cast<std::size_t>(i) * w + j;
    double d = 0.0;
    if (j < w - 1) d += px[p];
    if (j > 0) d -= px[p - 1];
    if (i < h - 1) d += py[p];
    if (i > 0) d -= py[p - static_cast<std::size_t>(w)];
    return d;
}

} // namespace detail

/// Isotropic TV objective 0.5*||u-f||^2 + tau*TV(u); exposed for the descent
/// diagnostics and tests.
inline double tv_objective(const ImageGrid& u, const ImageGrid& f, double tau) {
    require_same_shape(u, f, "tv_objective");
    const int h = u.height(), w = u.width();
    double fit = 0.0, tv = 0.0;
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            const double d = u(i, j) - f(i, j);
            fit += d * d;
            const double gx = j + 1 < w ? u(i, j + 1) - u(i, j) : 0.0;
            const double gy = i + 1 < h ? u(i + 1, j) - u(i, j) : 0.0;
            tv += std::sqrt(gx * gx + gy * gy);
        }
    return 0.5 * fit + tau * tv;
}

/// Chambolle's dual projection for min_u 0.5*||u-f||^2 + tau*TV_iso(u).
/// Fixed iteration count, step 0.25. An optional log records the primal
/// objective after each iteration.
inline ImageGrid tv_chambolle(const ImageGrid& f, double tau, int iterations = 30,
                              std::vector<double>* objective_log = nullptr) {
    if (tau < 0.0) throw DomainError("tv_chambolle: tau must be nonnegative");
    if (iterations < 1) throw DomainError("tv_chambolle: iterations must be >= 1");
    if (tau == 0.0) return f;

    const int h = f.height(), w = f.width();
    const std::size_t n = f.size();
    const double step = 0.25;
    std::vector<double> px(n, 0.0), py(n, 0.0), gx(n), gy(n);
    ImageGrid u = f;

    for (int it = 0; it < iterations; ++it) {
        // u = f - tau * div(p); then gradient-ascend the dual variable
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j)
                u(i, j) = f(i, j) - tau * detail::tv_divergence_at(px, py, h, w, i, j);
        detail::tv_gradient(u, gx, gy);
        for (std::size_t p = 0; p < n; ++p) {
            const double mag = std::sqrt(gx[p] * gx[p] + gy[p] * gy[p]);
            const double denom = 1.0 + step * mag;
            px[p] = (px[p] + step * gx[p]) / denom;
            py[p] = (py[p] + step * gy[p]) / denom;
        }
        if (objective_log) {
            ImageGrid cur(h, w);
            for (int i = 0; i < h; ++i)
                for (int j = 0; j < w; ++j)
                    cur(i, j) = f(i, j) - tau * detail::tv_divergence_at(px, py, h, w, i, j);
            objective_log->push_back(tv_objective(cur, f, tau));
        }
    }
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j)
            u(i, j) = f(i, j) - tau * detail::tv_divergence_at(px, py, h, w, i, j);
    return u;
}

/// Circular Gaussian smoothing with sigma = strength.
inline ImageGrid gaussian_smooth(const ImageGrid& x, double sigma) {
    if (sigma < 0.0) throw DomainError("gaussian_smooth: sigma must be nonnegative");
    if (sigma == 0.0) return x;
    int size = 2 * static_cast<int>(std::ceil(3.0 * sigma)) + 1;
    const int max_size = std::min(x.height(), x.width());
    if (size > max_size) size = max_size % 2 == 1 ? max_size : max_size - 1;
    if (size < 1) throw ShapeError("gaussian_smooth: image too small");
    return blur(x, BlurKernel::normalized(size, detail::sampled_gaussian_taps(size, sigma, sigma, 0.0)));
}

/// Applies the denoiser described by `spec`. Strength zero returns the
/// input unchanged for every kind.
inline ImageGrid denoise(const ImageGrid& x, const DenoiserSpec& spec) {
    if (spec.strength < 0.0) throw ConfigError("denoise: strength must be nonnegative");
    if (spec.strength == 0.0) return x;
    switch (spec.kind) {
        case DenoiserKind::identity: return x;
        case DenoiserKind::gaussian_smooth: return gaussian_smooth(x, spec.strength);
        case DenoiserKind::tv_chambolle: return tv_chambolle(x, spec.strength, spec.inner_iterations);
        case DenoiserKind::haar_soft: return haar_soft(x, spec.strength);
    }
    throw ConfigError("denoise: unknown kind");
}

} // namespace pdeconv
