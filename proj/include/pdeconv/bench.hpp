#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pdeconv/config.hpp"
#include "pdeconv/image.hpp"
#include "pdeconv/io.hpp"
#include "pdeconv/metrics.hpp"
#include "pdeconv/solvers.hpp"
#include "pdeconv/synth.hpp"
#include "pdeconv/tune.hpp"

namespace pdeconv {

enum class KernelClass { small, medium, large };

inline int kernel_class_size(KernelClass k) {
    switch (k) {
        case KernelClass::small: return 9;
        case KernelClass::medium: return 27;
        case KernelClass::large: return 45;
    }
    return 9;
}

inline const char* kernel_class_name(KernelClass k) {
    switch (k) {
        case KernelClass::small: return "small";
        case KernelClass::medium: return "medium";
        case KernelClass::large: return "large";
    }
    return "?";
}

inline KernelClass parse_kernel_class(const std::string& name) {
    if (name == "small") return KernelClass::small;
    if (name == "medium") return KernelClass::medium;
    if (name == "large") return KernelClass::large;
    throw ConfigError("unknown kernel class '" + name + "' (expected small|medium|large)");
}

/// One solver entry of a plan: `kind` selects the algorithm, `label` names
/// the CSV rows, `params` override the noise-aware defaults. Rows with the
/// same `seed_group` see identical degraded observations, which is how the
/// ablations form matched pairs; it defaults to the label so independent
/// solvers get independent draws.
struct SolverSpec {
    std::string label;
    std::string kind;
    KeyValues params;
    std::string seed_group;
};

struct ExperimentPlan {
    std::vector<std::string> images;
    std::vector<KernelClass> classes = {KernelClass::small, KernelClass::medium, KernelClass::large};
    int kernels_per_class = 3;
    std::vector<double> ppp_levels = {10.0, 30.0, 50.0};
    std::vector<SolverSpec> solvers;
    std::uint64_t base_seed = 1;
    std::string output_dir = "pdeconv_out";
    int workers = 1;
    bool timing_wall = false;   // off by default: keeps CSVs byte-identical across runs
    bool write_restored = true;
};

struct ResultRow {
    std::string image_id;
    std::string kernel_class;
    int kernel_index = 0;
    double ppp = 0.0;
    std::string solver_id;
    double psnr_db = 0.0;
    double ssim = 0.0;
    double wall_time_ms = 0.0;
    int iterations = 0;
};

inline std::string format_ppp(double ppp) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", ppp);
    return buf;
}

/// Trajectory kernel for (class, index), derived from the plan seed.
inline BlurKernel make_class_kernel(KernelClass cls, int index, std::uint64_t base_seed) {
    const int size = kernel_class_size(cls);
    const int steps = 2000;
    const std::uint64_t seed =
        derive_seed(base_seed, {"kernel", kernel_class_name(cls), std::to_string(index)});
    return make_trajectory_kernel(size, steps, default_trajectory_jitter(size, steps), seed);
}

struct SolveInput {
    const ImageGrid& y_norm;
    const BlurKernel& kernel;
    double alpha;
    double ppp;
    const ImageGrid* clean_oracle; // for oracle-weighted LET
};

struct SolveOutput {
    ImageGrid restored;
    int iterations = 0;
};

namespace detail {

inline double noise_sigma2(const SolveInput& in) {
    return std::max(mean(in.y_norm), 1e-12) / in.alpha;
}

inline DenoiserSpec denoiser_from(const KeyValues& p, DenoiserKind default_kind,
                                  double default_strength) {
    DenoiserSpec d;
    d.kind = parse_denoiser_kind(p.get_or("denoiser.kind", denoiser_kind_name(default_kind)));
    d.strength = p.get_double_or("denoiser.strength", default_strength);
    d.inner_iterations = static_cast<int>(p.get_int_or("denoiser.iters", 30));
    return d;
}

} // namespace detail

/// Builds the FIO schedule for a run: the ppp- and kernel-aware heuristic,
/// with any of mu0_scale / mu_ratio / lambda / mu overridden from params.
inline HqsSchedule fio_schedule_from(const KeyValues& p, int iterations, double ppp, int kernel_size) {
    HqsSchedule s = heuristic_schedule(iterations, ppp, kernel_size);
    const double mu0_scale = p.get_double_or("mu0_scale", -1.0);
    const double mu_ratio = p.get_double_or("mu_ratio", -1.0);
    if (mu0_scale > 0.0 || mu_ratio > 0.0) {
        const double m0 = (mu0_scale > 0.0 ? mu0_scale : 0.06) * ppp;
        const double r = mu_ratio > 0.0 ? mu_ratio : 2.0;
        for (int k = 0; k < iterations; ++k) s.mu[static_cast<std::size_t>(k)] = m0 * std::pow(r, k);
    }
    if (p.has("mu")) {
        s.mu = p.get_double_list("mu");
        if (s.mu.empty()) throw ConfigError("fio: empty mu list");
    }
    s.lambda = p.get_double_or("lambda", s.lambda);
    return s;
}

/// Dispatches one (observation, solver-config) pair to the corresponding
/// algorithm with noise-aware defaults.
inline SolveOutput run_solver(const std::string& kind, const KeyValues& p, const SolveInput& in) {
    const double sigma2 = detail::noise_sigma2(in);
    const double sigma = std::sqrt(sigma2);

    if (kind == "identity") {
        return {in.y_norm, 0};
    }
    if (kind == "wiener") {
        const SpectralKernel hk = precompute_kernel(in.kernel, in.y_norm.height(), in.y_norm.width());
        const double lam = p.get_double_or("lambda", auto_wiener_lambda(in.y_norm, in.alpha));
        return {wiener(in.y_norm, hk, lam), 1};
    }
    if (kind == "tv") {
        DenoiserSpec d = detail::denoiser_from(p, DenoiserKind::tv_chambolle, 1.2 * sigma);
        return {denoise(in.y_norm, d), 1};
    }
    if (kind == "wiener_tv") {
        const SpectralKernel hk = precompute_kernel(in.kernel, in.y_norm.height(), in.y_norm.width());
        const double lam = p.get_double_or("lambda", auto_wiener_lambda(in.y_norm, in.alpha));
        DenoiserSpec d = detail::denoiser_from(p, DenoiserKind::tv_chambolle, 2.0 * sigma);
        return {denoise(wiener(in.y_norm, hk, lam), d), 1};
    }
    if (kind == "let") {
        LetConfig cfg;
        const double base = p.get_double_or("lambda0", 2.0 * sigma2);
        cfg.lambdas = p.get_double_list_or("lambdas", {base, 4.0 * base, 16.0 * base});
        const double tau = p.get_double_or("tau", 1.5 * sigma);
        cfg.thresholds = p.get_double_list_or("thresholds",
                                              std::vector<double>(cfg.lambdas.size(), tau));
        const std::string mode = p.get_or("weights", "oracle");
        if (mode == "oracle") {
            cfg.weight_mode = LetWeightMode::oracle;
            if (!in.clean_oracle) throw ConfigError("let: oracle weights need a reference image");
        } else if (mode == "fixed") {
            cfg.weight_mode = LetWeightMode::fixed;
        } else {
            throw ConfigError("let: weights must be oracle|fixed");
        }
        return {solve_wiener_let(in.y_norm, in.kernel, cfg, in.clean_oracle), 1};
    }
    if (kind == "vstp") {
        VstpOptions opt;
        opt.iterations = static_cast<int>(p.get_int_or("iters", 5));
        opt.use_vst = p.get_bool_or("vst", true);
        opt.wiener_lambda = p.get_double_or("wiener_lambda", -1.0);
        if (p.has("mix")) opt.mix = p.get_double_list("mix");
        opt.vst.inverse_kind = p.get_or("vst_inverse", "algebraic") == "algebraic"
                                   ? VstInverse::algebraic
                                   : VstInverse::asymptotically_unbiased;
        DenoiserSpec d = detail::denoiser_from(p, DenoiserKind::tv_chambolle, 1.0);
        return {solve_vstp(in.y_norm, in.kernel, opt, d, in.alpha), opt.iterations};
    }
    if (kind == "fio") {
        const int iters = static_cast<int>(p.get_int_or("iters", 8));
        HqsSchedule schedule = fio_schedule_from(p, iters, in.ppp, in.kernel.size());
        FilterBank bank = FilterBank::parse(p.get_or("bank", "deriv3"));
        DenoiserSpec d = detail::denoiser_from(p, DenoiserKind::tv_chambolle, 0.15);
        FioOptions opt;
        opt.wiener_warm_start = p.get_bool_or("warm_start", false);
        opt.warm_start_lambda = p.get_double_or("warm_start_lambda", auto_wiener_lambda(in.y_norm, in.alpha));
        opt.denoise_per_feature = p.get_or("order", "aggregate") == "per_feature";
        opt.weighting = p.get_or("weighting", "data") == "data" ? HqsWeighting::data_side
                                                                : HqsWeighting::prior_side;
        return {solve_fio(in.y_norm, in.kernel, bank, schedule, d, opt), schedule.iterations()};
    }
    throw ConfigError("unknown solver kind '" + kind + "'");
}

namespace detail {

inline ImageGrid quantize_f32(const ImageGrid& img) {
    ImageGrid out = img;
    for (double& v : out.pixels()) v = static_cast<double>(static_cast<float>(v));
    return out;
}

inline ImageGrid clamp01(const ImageGrid& img) {
    ImageGrid out = img;
    for (double& v : out.pixels()) v = std::min(std::max(v, 0.0), 1.0);
    return out;
}

inline std::string sanitize_token(const std::string& s) {
    std::string out;
    for (char c : s)
        out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_');
    return out;
}

inline std::string image_stem(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

} // namespace detail

struct RunPlanResult {
    std::vector<ResultRow> rows;
    std::vector<std::string> skipped; // unreadable inputs, reported not fatal
    std::string csv_path;
};

inline std::string csv_header() {
    return "image_id,kernel_class,kernel_index,ppp,solver_id,psnr_db,ssim,wall_time_ms,iterations";
}

inline std::string format_row(const ResultRow& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%s,%d,%s,%s,%.12f,%.12f,%.3f,%d", r.image_id.c_str(),
                  r.kernel_class.c_str(), r.kernel_index, format_ppp(r.ppp).c_str(),
                  r.solver_id.c_str(), r.psnr_db, r.ssim, r.wall_time_ms, r.iterations);
    return buf;
}

/// Expands the plan into (image, kernel, ppp, solver) runs, executes them on
/// a small worker pool, and writes results.csv plus one restored PFM per
/// run. Output is fully determined by (plan, base_seed): rows are sorted by
/// plan order, seeds are derived per run, and timing is zero unless the plan
/// opts into wall-clock measurement.
inline RunPlanResult run_plan(const ExperimentPlan& plan) {
    if (plan.images.empty()) throw ConfigError("run_plan: no images");
    if (plan.classes.empty()) throw ConfigError("run_plan: no kernel classes");
    if (plan.ppp_levels.empty()) throw ConfigError("run_plan: no ppp levels");
    if (plan.solvers.empty()) throw ConfigError("run_plan: no solvers");
    if (plan.kernels_per_class < 1) throw ConfigError("run_plan: kernels_per_class must be >= 1");
    for (double ppp : plan.ppp_levels)
        if (ppp <= 0.0) throw ConfigError("run_plan: ppp levels must be positive");

    RunPlanResult result;

    struct LoadedImage {
        std::string id;
        ImageGrid grid;
    };
    std::vector<LoadedImage> images;
    for (const auto& path : plan.images) {
        try {
            images.push_back({detail::image_stem(path), read_image(path)});
        } catch (const std::exception& e) {
            result.skipped.push_back(path + ": " + e.what());
        }
    }
    if (images.empty()) throw ConfigError("run_plan: no readable images");

    std::vector<BlurKernel> kernels;
    kernels.reserve(plan.classes.size() * static_cast<std::size_t>(plan.kernels_per_class));
    for (KernelClass cls : plan.classes)
        for (int k = 0; k < plan.kernels_per_class; ++k)
            kernels.push_back(make_class_kernel(cls, k, plan.base_seed));

    struct Unit {
        int image, cls, kernel, ppp, solver;
    };
    std::vector<Unit> units;
    for (int i = 0; i < static_cast<int>(images.size()); ++i)
        for (int c = 0; c < static_cast<int>(plan.classes.size()); ++c)
            for (int k = 0; k < plan.kernels_per_class; ++k)
                for (int g = 0; g < static_cast<int>(plan.ppp_levels.size()); ++g)
                    for (int s = 0; s < static_cast<int>(plan.solvers.size()); ++s)
                        units.push_back({i, c, k, g, s});

    const std::filesystem::path out_dir(plan.output_dir);
    const std::filesystem::path restored_dir = out_dir / "restored";
    std::filesystem::create_directories(out_dir);
    if (plan.write_restored) std::filesystem::create_directories(restored_dir);

    std::vector<ResultRow> rows(units.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex error_mutex;

    auto work = [&]() {
        while (true) {
            const std::size_t u = next.fetch_add(1);
            if (u >= units.size() || failed.load()) break;
            const Unit& unit = units[u];
            try {
                const LoadedImage& img = images[static_cast<std::size_t>(unit.image)];
                const KernelClass cls = plan.classes[static_cast<std::size_t>(unit.cls)];
                const BlurKernel& kernel =
                    kernels[static_cast<std::size_t>(unit.cls) * plan.kernels_per_class + unit.kernel];
                const double ppp = plan.ppp_levels[static_cast<std::size_t>(unit.ppp)];
                const SolverSpec& solver = plan.solvers[static_cast<std::size_t>(unit.solver)];
                const std::string seed_group =
                    solver.seed_group.empty() ? solver.label : solver.seed_group;

                const std::string kernel_id =
                    std::string(kernel_class_name(cls)) + ":" + std::to_string(unit.kernel);
                DegradationSpec spec{kernel, ppp,
                                     derive_seed(plan.base_seed, {"run", img.id, kernel_id,
                                                                  format_ppp(ppp), seed_group})};
                const Degraded degraded = degrade(img.grid, spec);
                ImageGrid y_norm = degraded.counts;
                for (double& v : y_norm.pixels()) v /= degraded.alpha;

                const auto t0 = std::chrono::steady_clock::now();
                SolveOutput out = run_solver(solver.kind, solver.params,
                                             {y_norm, kernel, degraded.alpha, ppp, &img.grid});
                const auto t1 = std::chrono::steady_clock::now();

                // score exactly what gets persisted: clipped to [0,1], float32
                const ImageGrid final_img = detail::quantize_f32(detail::clamp01(out.restored));
                ResultRow row;
                row.image_id = img.id;
                row.kernel_class = kernel_class_name(cls);
                row.kernel_index = unit.kernel;
                row.ppp = ppp;
                row.solver_id = solver.label;
                row.psnr_db = psnr(img.grid, final_img);
                row.ssim = ssim(img.grid, final_img);
                row.iterations = out.iterations;
                row.wall_time_ms =
                    plan.timing_wall
                        ? std::chrono::duration<double, std::milli>(t1 - t0).count()
                        : 0.0;
                if (plan.write_restored) {
                    const std::string name = detail::sanitize_token(img.id) + "__" +
                                             kernel_class_name(cls) + std::to_string(unit.kernel) +
                                             "__ppp" + detail::sanitize_token(format_ppp(ppp)) +
                                             "__" + detail::sanitize_token(solver.label) + ".pfm";
                    write_image((restored_dir / name).string(), final_img);
                }
                rows[u] = std::move(row);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true)) first_error = e.what();
            }
        }
    };

    const int workers = std::max(1, plan.workers);
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    if (failed.load()) throw NumericError("run_plan: " + first_error);

    result.rows = std::move(rows);

    const std::string csv = (out_dir / "results.csv").string();
    std::ofstream out(csv, std::ios::binary);
    if (!out) throw ParseError(csv + ": cannot open for writing");
    out << csv_header() << "\n";
    for (const auto& r : result.rows) out << format_row(r) << "\n";
    result.csv_path = csv;
    return result;
}

inline double mean_psnr(const std::vector<ResultRow>& rows, const std::string& solver_id) {
    double acc = 0.0;
    long count = 0;
    for (const auto& r : rows)
        if (r.solver_id == solver_id) {
            acc += r.psnr_db;
            ++count;
        }
    if (count == 0) throw ConfigError("mean_psnr: no rows for solver '" + solver_id + "'");
    return acc / static_cast<double>(count);
}

/// Parses the line-oriented plan format: repeated `image=`, comma lists for
/// classes and ppp, and one `solver = kind key=value ...` line per entry.
inline ExperimentPlan parse_plan(const KeyValues& kv, const std::string& default_out = "pdeconv_out") {
    ExperimentPlan plan;
    plan.images = kv.get_all("image");
    plan.classes.clear();
    for (const auto& name : kv.get_string_list_or("kernel_classes", {"small", "medium", "large"}))
        plan.classes.push_back(parse_kernel_class(name));
    plan.kernels_per_class = static_cast<int>(kv.get_int_or("kernels_per_class", 3));
    plan.ppp_levels = kv.get_double_list_or("ppp", {10.0, 30.0, 50.0});
    plan.base_seed = static_cast<std::uint64_t>(kv.get_int_or("seed", 1));
    plan.output_dir = kv.get_or("output_dir", default_out);
    plan.workers = static_cast<int>(kv.get_int_or("workers", 1));
    const std::string timing = kv.get_or("timing", "off");
    if (timing == "wall")
        plan.timing_wall = true;
    else if (timing != "off")
        throw ConfigError("plan: timing must be off|wall");
    plan.write_restored = kv.get_bool_or("write_restored", true);

    for (const auto& line : kv.get_all("solver")) {
        SolverSpec spec;
        KeyValues params;
        std::istringstream ss(line);
        std::string tok;
        ss >> spec.kind;
        if (spec.kind.empty()) throw ConfigError("plan: empty solver line");
        spec.label = spec.kind;
        while (ss >> tok) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos)
                throw ConfigError("plan: solver option '" + tok + "' is not key=value");
            const std::string key = tok.substr(0, eq);
            const std::string value = tok.substr(eq + 1);
            if (key == "label")
                spec.label = value;
            else if (key == "seed_group")
                spec.seed_group = value;
            else
                params.set(key, value);
        }
        spec.params = std::move(params);
        plan.solvers.push_back(std::move(spec));
    }
    return plan;
}

} // namespace pdeconv
