#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "pdeconv/errors.hpp"
#include "pdeconv/image.hpp"

namespace pdeconv {

using cplx = std::complex<double>;

/// Process-wide FFTW plan cache keyed by (height, width). Plan creation is
/// serialized (FFTW requirement); execution runs lock-free on caller buffers
/// via the new-array interface, which is safe across threads. ESTIMATE plans
/// keep transforms bit-reproducible between runs.
class FftEngine {
public:
    static FftEngine& instance() {
        static FftEngine engine;
        return engine;
    }

    void forward(int h, int w, const cplx* in, cplx* out) {
        fftw_execute_dft(plans_for(h, w).fwd,
                         reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                         reinterpret_cast<fftw_complex*>(out));
    }

    /// Inverse transform, normalized by 1/(h*w).
    void inverse(int h, int w, const cplx* in, cplx* out) {
        fftw_execute_dft(plans_for(h, w).bwd,
                         reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                         reinterpret_cast<fftw_complex*>(out));
        const double scale = 1.0 / (static_cast<double>(h) * w);
        const std::size_t n = static_cast<std::size_t>(h) * w;
        for (std::size_t i = 0; i < n; ++i) out[i] *= scale;
    }

    FftEngine(const FftEngine&) = delete;
    FftEngine& operator=(const FftEngine&) = delete;

private:
    struct Plans {
        fftw_plan fwd = nullptr;
        fftw_plan bwd = nullptr;
        std::vector<cplx> scratch_in, scratch_out;
    };

    FftEngine() = default;
    ~FftEngine() {
        for (auto& [key, p] : plans_) {
            fftw_destroy_plan(p.fwd);
            fftw_destroy_plan(p.bwd);
        }
    }

    Plans& plans_for(int h, int w) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_pair(h, w);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;

        Plans p;
        const std::size_t n = static_cast<std::size_t>(h) * w;
        p.scratch_in.resize(n);
        p.scratch_out.resize(n);
        auto* si = reinterpret_cast<fftw_complex*>(p.scratch_in.data());
        auto* so = reinterpret_cast<fftw_complex*>(p.scratch_out.data());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        p.fwd = fftw_plan_dft_2d(h, w, si, so, FFTW_FORWARD, flags);
        p.bwd = fftw_plan_dft_2d(h, w, si, so, FFTW_BACKWARD, flags);
        if (!p.fwd || !p.bwd) throw NumericError("FftEngine: plan creation failed");
        return plans_.emplace(key, std::move(p)).first->second;
    }

    std::mutex mutex_;
    std::map<std::pair<int, int>, Plans> plans_;
};

/// Forward FFT of a real image into a full complex spectrum.
inline std::vector<cplx> fft2(const ImageGrid& img) {
    std::vector<cplx> in(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) in[i] = cplx(img.pixels()[i], 0.0);
    std::vector<cplx> out(img.size());
    FftEngine::instance().forward(img.height(), img.width(), in.data(), out.data());
    return out;
}

/// Inverse FFT of a spectrum that represents a real field. The imaginary
/// residue is checked before discarding it; a large residue means a
/// kernel-centering or conjugation bug upstream.
inline ImageGrid ifft2_real(int h, int w, const std::vector<cplx>& spectrum) {
    if (spectrum.size() != static_cast<std::size_t>(h) * w)
        throw ShapeError("ifft2_real: spectrum length does not match dimensions");
    std::vector<cplx> out(spectrum.size());
    FftEngine::instance().inverse(h, w, spectrum.data(), out.data());
    double max_im = 0.0, max_re = 0.0;
    for (const cplx& v : out) {
        max_im = std::max(max_im, std::fabs(v.imag()));
        max_re = std::max(max_re, std::fabs(v.real()));
    }
    if (max_im > 1e-9 * std::max(1.0, max_re))
        throw NumericError("ifft2_real: imaginary residue " + std::to_string(max_im) +
                           " exceeds tolerance for a real field");
    std::vector<double> re(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) re[i] = out[i].real();
    return ImageGrid(h, w, std::move(re));
}

} // namespace pdeconv
