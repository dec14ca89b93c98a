#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "pdeconv/denoise.hpp"
#include "pdeconv/image.hpp"
#include "pdeconv/spectral.hpp"
#include "pdeconv/synth.hpp"
#include "pdeconv/vst.hpp"

namespace pdeconv {

/// Small 3x3 feature stencil, center origin. Unlike blur kernels these are
/// not normalized; derivative filters sum to zero.
struct FeatureFilter {
    std::array<double, 9> taps{};
    std::string name;
};

/// Linear filter bank for feature-space deconvolution.
struct FilterBank {
    std::vector<FeatureFilter> filters;
    bool includes_identity = false;

    static FilterBank identity_only() {
        FilterBank b;
        b.filters.push_back({{0, 0, 0, 0, 1, 0, 0, 0, 0}, "id"});
        b.includes_identity = true;
        return b;
    }

    /// Identity plus horizontal and vertical first differences.
    static FilterBank derivative3() {
        FilterBank b;
        b.filters.push_back({{0, 0, 0, 0, 1, 0, 0, 0, 0}, "id"});
        b.filters.push_back({{0, 0, 0, 0, 1, -1, 0, 0, 0}, "dx"});
        b.filters.push_back({{0, 0, 0, 0, 1, 0, 0, -1, 0}, "dy"});
        b.includes_identity = true;
        return b;
    }

    static FilterBank parse(const std::string& name) {
        if (name == "identity") return identity_only();
        if (name == "deriv3") return derivative3();
        throw ConfigError("unknown filter bank '" + name + "' (expected identity|deriv3)");
    }
};

inline ImageGrid apply_filter(const ImageGrid& x, const FeatureFilter& f) {
    const int h = x.height(), w = x.width();
    ImageGrid out(h, w);
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
            double acc = 0.0;
            for (int di = -1; di <= 1; ++di) {
                const int r = (i - di + h) % h;
                for (int dj = -1; dj <= 1; ++dj) {
                    const double t = f.taps[static_cast<std::size_t>(di + 1) * 3 + (dj + 1)];
                    if (t == 0.0) continue;
                    acc += t * x(r, (j - dj + w) % w);
                }
            }
            out(i, j) = acc;
        }
    }
    return out;
}

inline std::vector<cplx> filter_spectrum(const FeatureFilter& f, int h, int w) {
    return detail::spectrum_of_taps(h, w, 3, 3, 1, 1, std::vector<double>(f.taps.begin(), f.taps.end()));
}

/// Least-squares recovery of x from features z_i = F_i x via Fourier-domain
/// normal equations. The epsilon guard is only engaged when the bank lacks
/// the identity filter (otherwise the denominator is bounded below by 1).
inline ImageGrid feature_aggregate(const std::vector<ImageGrid>& z_list, const FilterBank& bank) {
    if (bank.filters.empty()) throw ConfigError("feature_aggregate: empty filter bank");
    if (z_list.size() != bank.filters.size())
        throw ShapeError("feature_aggregate: feature count does not match bank size");
    for (std::size_t i = 1; i < z_list.size(); ++i)
        require_same_shape(z_list[0], z_list[i], "feature_aggregate");

    const int h = z_list[0].height(), w = z_list[0].width();
    const double eps = bank.includes_identity ? 0.0 : 1e-8;
    std::vector<cplx> num(static_cast<std::size_t>(h) * w, cplx(0.0, 0.0));
    std::vector<double> den(static_cast<std::size_t>(h) * w, eps);
    for (std::size_t i = 0; i < z_list.size(); ++i) {
        const std::vector<cplx> fs = filter_spectrum(bank.filters[i], h, w);
        const std::vector<cplx> zs = fft2(z_list[i]);
        for (std::size_t p = 0; p < num.size(); ++p) {
            num[p] += std::conj(fs[p]) * zs[p];
            den[p] += std::norm(fs[p]);
        }
    }
    for (std::size_t p = 0; p < num.size(); ++p) {
        if (den[p] <= 0.0)
            throw NumericError("feature_aggregate: zero aggregation denominator at a frequency");
        num[p] /= den[p];
    }
    return ifft2_real(h, w, num);
}

/// Per-iteration penalty weights (shared across features), prior weight, and
/// the implied iteration count.
struct HqsSchedule {
    std::vector<double> mu;
    double lambda = 1.0;

    int iterations() const { return static_cast<int>(mu.size()); }
    void validate() const {
        for (double m : mu)
            if (!(m > 0.0)) throw ConfigError("HqsSchedule: all mu must be positive");
        if (lambda < 0.0) throw ConfigError("HqsSchedule: lambda must be nonnegative");
    }
};

struct FioOptions {
    bool wiener_warm_start = false;       // x0 = wiener(y) instead of x0 = y
    double warm_start_lambda = 1e-2;
    bool denoise_per_feature = false;     // denoise each z_i before aggregation
    HqsWeighting weighting = HqsWeighting::data_side;
};

struct FioIterationStat {
    int k = 0;
    double mu = 0.0;
    double denoiser_strength = 0.0;
    double objective = 0.0; // HQS objective with the TV prior surrogate
};

struct FioTrace {
    std::vector<FioIterationStat> iterations;
};

namespace detail {

inline void require_finite(const ImageGrid& img, int iteration, const char* stage) {
    for (double v : img.pixels())
        if (!std::isfinite(v))
            throw NumericError(std::string("solve_fio: non-finite value in ") + stage +
                               " at iteration " + std::to_string(iteration));
}

} // namespace detail

/// Feature-space HQS deconvolution, unrolled for a fixed iteration count:
/// per iteration an exact Fourier-domain z-step for every feature, a
/// least-squares aggregation back to the image, and a plug-in denoiser whose
/// strength tracks lambda / mu_k.
inline ImageGrid solve_fio(const ImageGrid& y_norm, const BlurKernel& h, const FilterBank& bank,
                           const HqsSchedule& schedule, const DenoiserSpec& denoiser,
                           const FioOptions& options = {}, FioTrace* trace = nullptr) {
    if (bank.filters.empty()) throw ConfigError("solve_fio: empty filter bank");
    schedule.validate();

    const SpectralKernel hk = precompute_kernel(h, y_norm.height(), y_norm.width());
    const std::size_t m = bank.filters.size();

    std::vector<ImageGrid> feat_obs;
    feat_obs.reserve(m);
    for (const auto& f : bank.filters) feat_obs.push_back(apply_filter(y_norm, f));

    ImageGrid x = options.wiener_warm_start ? wiener(y_norm, hk, options.warm_start_lambda) : y_norm;

    std::vector<ImageGrid> z;
    z.reserve(m);
    for (int k = 1; k <= schedule.iterations(); ++k) {
        const double mu = schedule.mu[static_cast<std::size_t>(k - 1)];
        const double strength = denoiser.strength * schedule.lambda / mu;
        z.clear();
        for (std::size_t i = 0; i < m; ++i) {
            ImageGrid zi = hqs_data_step(apply_filter(x, bank.filters[i]), feat_obs[i], hk, mu,
                                         options.weighting);
            if (options.denoise_per_feature) {
                DenoiserSpec per = denoiser;
                per.strength = strength;
                zi = denoise(zi, per);
            }
            z.push_back(std::move(zi));
        }
        ImageGrid aggregated = feature_aggregate(z, bank);
        detail::require_finite(aggregated, k, "aggregation");
        if (options.denoise_per_feature) {
            x = std::move(aggregated);
        } else {
            DenoiserSpec step = denoiser;
            step.strength = strength;
            x = denoise(aggregated, step);
        }
        detail::require_finite(x, k, "denoising");

        if (trace) {
            // Eq-style composite objective with an isotropic-TV surrogate prior.
            double data = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                const ImageGrid hz = blur(z[i], hk);
                for (std::size_t p = 0; p < hz.size(); ++p) {
                    const double d = feat_obs[i].pixels()[p] - hz.pixels()[p];
                    data += d * d;
                }
            }
            const double tv = tv_objective(x, x, 1.0); // pure TV term: fit part is zero
            trace->iterations.push_back({k, mu, strength, mu * data + schedule.lambda * tv});
        }
    }
    return x;
}

/// Mixing schedule and Wiener settings for the iterative VST pipeline.
struct VstpOptions {
    int iterations = 5;
    std::vector<double> mix;      // lambda_t; empty -> 1 - 1/(t+1)
    double wiener_lambda = -1.0;  // < 0 -> noise-scaled automatic choice
    bool use_vst = true;
    VstConfig vst;
};

namespace detail {

inline double vstp_mix_weight(const VstpOptions& opt, int t) {
    double lt;
    if (opt.mix.empty()) {
        lt = 1.0 - 1.0 / (t + 1.0);
    } else {
        if (static_cast<std::size_t>(t) > opt.mix.size())
            throw ConfigError("solve_vstp: mix schedule shorter than iteration count");
        lt = opt.mix[static_cast<std::size_t>(t - 1)];
    }
    if (lt < 0.0 || lt > 1.0) throw ConfigError("solve_vstp: mixing weight outside [0,1]");
    return lt;
}

} // namespace detail

/// Automatic Wiener regularizer from the per-pixel shot-noise variance of
/// the normalized observation (mean(y)/alpha).
inline double auto_wiener_lambda(const ImageGrid& y_norm, double alpha, double scale = 4.0) {
    return scale * std::max(mean(y_norm), 1e-12) / alpha;
}

/// Iterative Wiener + transform-denoise scheme: each pass mixes the previous
/// estimate with the Wiener solution, then denoises, by default inside an
/// Anscombe wrapper at the observation's photon scale. Without the wrapper
/// the denoiser strength is mapped through the Anscombe Jacobian at the mean
/// count so both variants are comparably tuned.
inline ImageGrid solve_vstp(const ImageGrid& y_norm, const BlurKernel& h, const VstpOptions& options,
                            const DenoiserSpec& denoiser, double alpha) {
    if (alpha <= 0.0) throw DomainError("solve_vstp: alpha must be positive");
    if (options.iterations < 0) throw ConfigError("solve_vstp: negative iteration count");
    const SpectralKernel hk = precompute_kernel(h, y_norm.height(), y_norm.width());
    const double wl = options.wiener_lambda >= 0.0 ? options.wiener_lambda
                                                   : auto_wiener_lambda(y_norm, alpha);
    const ImageGrid x_wiener = wiener(y_norm, hk, wl);

    ImageGrid x = x_wiener;
    for (int t = 1; t <= options.iterations; ++t) {
        const double lt = detail::vstp_mix_weight(options, t);
        ImageGrid x_data(y_norm.height(), y_norm.width());
        for (std::size_t p = 0; p < x_data.size(); ++p)
            x_data.pixels()[p] = lt * x.pixels()[p] + (1.0 - lt) * x_wiener.pixels()[p];

        if (options.use_vst) {
            ImageGrid counts = clamp_nonneg(x_data);
            for (double& v : counts.pixels()) v *= alpha;
            ImageGrid den = denoise(anscombe(counts), denoiser);
            x = inverse_anscombe(den, options.vst);
            for (double& v : x.pixels()) v /= alpha;
        } else {
            const double mean_counts = std::max(alpha * mean(y_norm), 0.0);
            DenoiserSpec plain = denoiser;
            plain.strength = denoiser.strength * std::sqrt(mean_counts + 0.375) / alpha;
            x = denoise(clamp_nonneg(x_data), plain);
        }
    }
    return x;
}

enum class LetWeightMode { oracle, fixed };

/// Wiener filter bank settings: one branch per regularizer, wavelet
/// threshold per branch, and the branch combination rule.
struct LetConfig {
    std::vector<double> lambdas;
    std::vector<double> thresholds;
    LetWeightMode weight_mode = LetWeightMode::oracle;

    void validate() const {
        if (lambdas.empty()) throw ConfigError("LetConfig: at least one branch required");
        for (std::size_t i = 0; i < lambdas.size(); ++i) {
            if (!(lambdas[i] > 0.0)) throw ConfigError("LetConfig: lambdas must be positive");
            if (i > 0 && !(lambdas[i] > lambdas[i - 1]))
                throw ConfigError("LetConfig: lambdas must be strictly increasing");
        }
        if (thresholds.size() != lambdas.size())
            throw ConfigError("LetConfig: one threshold per branch required");
        for (double t : thresholds)
            if (t < 0.0) throw ConfigError("LetConfig: thresholds must be nonnegative");
    }
};

namespace detail {

/// Dense symmetric solve by Gauss-Jordan with partial pivoting; falls back
/// to a tiny ridge if the Gram matrix is numerically singular.
inline std::vector<double> solve_gram(std::vector<double> g, std::vector<double> rhs) {
    const std::size_t n = rhs.size();
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::vector<double> a = g;
        std::vector<double> b = rhs;
        if (attempt == 1) {
            double tr = 0.0;
            for (std::size_t i = 0; i < n; ++i) tr += a[i * n + i];
            const double ridge = std::max(tr, 1.0) * 1e-12;
            for (std::size_t i = 0; i < n; ++i) a[i * n + i] += ridge;
        }
        bool ok = true;
        for (std::size_t col = 0; col < n && ok; ++col) {
            std::size_t piv = col;
            for (std::size_t r = col + 1; r < n; ++r)
                if (std::fabs(a[r * n + col]) > std::fabs(a[piv * n + col])) piv = r;
            if (std::fabs(a[piv * n + col]) < 1e-30) {
                ok = false;
                break;
            }
            if (piv != col) {
                for (std::size_t c = 0; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
                std::swap(b[piv], b[col]);
            }
            const double d = a[col * n + col];
            for (std::size_t r = 0; r < n; ++r) {
                if (r == col) continue;
                const double f = a[r * n + col] / d;
                for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
                b[r] -= f * b[col];
            }
        }
        if (ok) {
            for (std::size_t i = 0; i < n; ++i) b[i] /= a[i * n + i];
            return b;
        }
    }
    throw NumericError("solve_gram: singular system");
}

} // namespace detail

/// Linear-expansion-of-thresholds skeleton: a bank of Wiener branches, each
/// wavelet-thresholded, combined with least-squares weights against the
/// oracle (or uniform weights when no oracle is available).
inline ImageGrid solve_wiener_let(const ImageGrid& y_norm, const BlurKernel& h, const LetConfig& cfg,
                                  const ImageGrid* oracle_x = nullptr) {
    cfg.validate();
    if (cfg.weight_mode == LetWeightMode::oracle && oracle_x == nullptr)
        throw ConfigError("solve_wiener_let: oracle weight mode requires the reference image");

    const SpectralKernel hk = precompute_kernel(h, y_norm.height(), y_norm.width());
    const std::size_t kb = cfg.lambdas.size();
    std::vector<ImageGrid> branches;
    branches.reserve(kb);
    for (std::size_t k = 0; k < kb; ++k)
        branches.push_back(haar_soft(wiener(y_norm, hk, cfg.lambdas[k]), cfg.thresholds[k]));

    std::vector<double> weights(kb, 1.0 / static_cast<double>(kb));
    if (cfg.weight_mode == LetWeightMode::oracle) {
        require_same_shape(*oracle_x, y_norm, "solve_wiener_let");
        std::vector<double> gram(kb * kb, 0.0), rhs(kb, 0.0);
        for (std::size_t a = 0; a < kb; ++a) {
            for (std::size_t b = a; b < kb; ++b) {
                double dot = 0.0;
                for (std::size_t p = 0; p < y_norm.size(); ++p)
                    dot += branches[a].pixels()[p] * branches[b].pixels()[p];
                gram[a * kb + b] = gram[b * kb + a] = dot;
            }
            double dot = 0.0;
            for (std::size_t p = 0; p < y_norm.size(); ++p)
                dot += branches[a].pixels()[p] * oracle_x->pixels()[p];
            rhs[a] = dot;
        }
        weights = detail::solve_gram(std::move(gram), std::move(rhs));
    }

    ImageGrid out(y_norm.height(), y_norm.width(), 0.0);
    for (std::size_t k = 0; k < kb; ++k)
        for (std::size_t p = 0; p < out.size(); ++p)
            out.pixels()[p] += weights[k] * branches[k].pixels()[p];
    return out;
}

} // namespace pdeconv
