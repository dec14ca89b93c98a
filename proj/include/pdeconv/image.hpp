#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "pdeconv/errors.hpp"

namespace pdeconv {

/// Dense 2-D scalar field, row-major. Clean references live in [0,1];
/// photon-count observations are nonnegative reals. All values finite.
class ImageGrid {
public:
    ImageGrid() = default;

    ImageGrid(int height, int width, double fill = 0.0)
        : height_(height), width_(width) {
        check_dims(height, width);
        data_.assign(static_cast<std::size_t>(height) * width, fill);
        if (!std::isfinite(fill)) throw DomainError("ImageGrid: non-finite fill value");
    }

    ImageGrid(int height, int width, std::vector<double> data)
        : height_(height), width_(width), data_(std::move(data)) {
        check_dims(height, width);
        if (data_.size() != static_cast<std::size_t>(height) * width)
            throw ShapeError("ImageGrid: data length " + std::to_string(data_.size()) +
                             " does not match " + std::to_string(height) + "x" + std::to_string(width));
        for (double v : data_)
            if (!std::isfinite(v)) throw DomainError("ImageGrid: non-finite pixel value");
    }

    int height() const { return height_; }
    int width() const { return width_; }
    std::size_t size() const { return data_.size(); }

    double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * width_ + c]; }
    double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * width_ + c]; }

    const std::vector<double>& pixels() const { return data_; }
    std::vector<double>& pixels() { return data_; }
    const double* data() const { return data_.data(); }
    double* data() { return data_.data(); }

    bool same_shape(const ImageGrid& other) const {
        return height_ == other.height_ && width_ == other.width_;
    }

private:
    static void check_dims(int h, int w) {
        if (h <= 0 || w <= 0)
            throw ShapeError("ImageGrid: dimensions must be positive, got " +
                             std::to_string(h) + "x" + std::to_string(w));
    }

    int height_ = 0;
    int width_ = 0;
    std::vector<double> data_;
};

inline void require_same_shape(const ImageGrid& a, const ImageGrid& b, const char* where) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(where) + ": shape mismatch " +
                         std::to_string(a.height()) + "x" + std::to_string(a.width()) + " vs " +
                         std::to_string(b.height()) + "x" + std::to_string(b.width()));
}

inline double mean(const ImageGrid& img) {
    double s = 0.0;
    for (double v : img.pixels()) s += v;
    return s / static_cast<double>(img.size());
}

inline double max_abs(const ImageGrid& img) {
    double m = 0.0;
    for (double v : img.pixels()) m = std::max(m, std::fabs(v));
    return m;
}

/// Elementwise max(v, 0); FFT round-off can leave tiny negatives on
/// mathematically nonnegative fields.
inline ImageGrid clamp_nonneg(const ImageGrid& img) {
    ImageGrid out = img;
    for (double& v : out.pixels()) v = std::max(v, 0.0);
    return out;
}

/// Odd-sized nonnegative convolution stencil with unit mass (the blur H).
class BlurKernel {
public:
    BlurKernel(int size, std::vector<double> taps) : size_(size), taps_(std::move(taps)) {
        if (size <= 0 || size % 2 == 0)
            throw DomainError("BlurKernel: size must be odd and positive, got " + std::to_string(size));
        if (taps_.size() != static_cast<std::size_t>(size) * size)
            throw ShapeError("BlurKernel: expected " + std::to_string(size * size) + " taps");
        double sum = 0.0;
        for (double t : taps_) {
            if (!std::isfinite(t)) throw DomainError("BlurKernel: non-finite tap");
            if (t < 0.0) throw DomainError("BlurKernel: negative tap");
            sum += t;
        }
        if (std::fabs(sum - 1.0) > 1e-12)
            throw DomainError("BlurKernel: taps sum to " + std::to_string(sum) + ", expected 1");
    }

    /// Builds from raw nonnegative weights, normalizing the mass to 1.
    static BlurKernel normalized(int size, std::vector<double> weights) {
        double sum = 0.0;
        for (double w : weights) {
            if (!std::isfinite(w)) throw DomainError("BlurKernel: non-finite weight");
            if (w < 0.0) throw DomainError("BlurKernel: negative weight");
            sum += w;
        }
        if (sum <= 0.0) throw DomainError("BlurKernel: total weight must be positive");
        for (double& w : weights) w /= sum;
        // renormalize residual round-off onto the largest tap
        double resid = 1.0;
        for (double w : weights) resid -= w;
        auto it = std::max_element(weights.begin(), weights.end());
        *it += resid;
        return BlurKernel(size, std::move(weights));
    }

    static BlurKernel delta(int size = 1) {
        std::vector<double> taps(static_cast<std::size_t>(size) * size, 0.0);
        taps[static_cast<std::size_t>(size / 2) * size + size / 2] = 1.0;
        return BlurKernel(size, std::move(taps));
    }

    int size() const { return size_; }
    int radius() const { return size_ / 2; }
    double operator()(int i, int j) const { return taps_[static_cast<std::size_t>(i) * size_ + j]; }
    const std::vector<double>& taps() const { return taps_; }

private:
    int size_;
    std::vector<double> taps_;
};

/// Per-image quality summary.
struct QualityReport {
    double psnr_db = 0.0;
    double ssim = 0.0;
    double mse = 0.0;
};

} // namespace pdeconv
