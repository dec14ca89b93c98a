#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pdeconv/bench.hpp"
#include "pdeconv/tune.hpp"

namespace pdeconv {

struct AblationOptions {
    std::vector<std::string> images;
    std::uint64_t base_seed = 1;
    std::string output_dir = "pdeconv_out";
    int workers = 1;
};

struct AblationArmSummary {
    std::string label;
    double mean_psnr = 0.0;
};

/// Outcome of one paired experiment: per-arm means, the headline difference
/// (second arm minus baseline), and a direction verdict at the 0.05 dB
/// no-effect band.
struct AblationReport {
    std::string name;
    std::vector<AblationArmSummary> arms;
    double delta_db = 0.0;
    std::string verdict;
    std::string csv_path;
    std::vector<std::string> notes;
};

namespace detail {

inline std::string verdict_for(double delta_db) {
    if (delta_db > 0.05) return "improved";
    if (delta_db < -0.05) return "degraded";
    return "within +-0.05 dB";
}

inline SolverSpec arm(const std::string& label, const std::string& kind, const std::string& group,
                      std::initializer_list<std::pair<const char*, std::string>> params = {}) {
    SolverSpec s;
    s.label = label;
    s.kind = kind;
    s.seed_group = group;
    for (const auto& [k, v] : params) s.params.set(k, v);
    return s;
}

inline AblationReport summarize(const std::string& name, const RunPlanResult& run,
                                const ExperimentPlan& plan, const std::string& baseline,
                                const std::string& variant) {
    AblationReport rep;
    rep.name = name;
    for (const auto& s : plan.solvers)
        rep.arms.push_back({s.label, mean_psnr(run.rows, s.label)});
    rep.delta_db = mean_psnr(run.rows, variant) - mean_psnr(run.rows, baseline);
    rep.verdict = verdict_for(rep.delta_db);
    rep.csv_path = run.csv_path;
    return rep;
}

inline void write_verdict(const AblationReport& rep, const std::filesystem::path& dir) {
    std::ofstream out(dir / "verdict.txt");
    out << "ablation = " << rep.name << "\n";
    char buf[160];
    for (const auto& a : rep.arms) {
        std::snprintf(buf, sizeof buf, "mean_psnr_db[%s] = %.6f", a.label.c_str(), a.mean_psnr);
        out << buf << "\n";
    }
    std::snprintf(buf, sizeof buf, "delta_db = %.6f", rep.delta_db);
    out << buf << "\nverdict = " << rep.verdict << "\n";
    for (const auto& n : rep.notes) out << "# " << n << "\n";
}

inline ExperimentPlan ablation_plan(const AblationOptions& opt, const std::string& name,
                                    std::vector<double> ppp, std::vector<SolverSpec> solvers) {
    ExperimentPlan plan;
    plan.images = opt.images;
    plan.classes = {KernelClass::medium};
    plan.kernels_per_class = 3;
    plan.ppp_levels = std::move(ppp);
    plan.solvers = std::move(solvers);
    plan.base_seed = opt.base_seed;
    plan.output_dir = (std::filesystem::path(opt.output_dir) / ("ablation_" + name)).string();
    plan.workers = opt.workers;
    plan.write_restored = false;
    return plan;
}

} // namespace detail

/// PSNR versus unroll depth: the same solver truncated at K = 1, 2, 4, 8.
inline AblationReport ablate_iterations(const AblationOptions& opt) {
    std::vector<SolverSpec> arms;
    for (int k : {1, 2, 4, 8})
        arms.push_back(detail::arm("fio_k" + std::to_string(k), "fio", "fio_iters",
                                   {{"iters", std::to_string(k)}}));
    ExperimentPlan plan = detail::ablation_plan(opt, "iterations", {30.0}, std::move(arms));
    const RunPlanResult run = run_plan(plan);
    AblationReport rep = detail::summarize("iterations", run, plan, "fio_k1", "fio_k8");
    detail::write_verdict(rep, plan.output_dir);
    return rep;
}

/// Derivative bank versus identity-only bank. The default pipeline
/// (aggregate, then denoise) is provably bank-invariant for linear filters,
/// so the per-feature denoising order is reported alongside it.
inline AblationReport ablate_feature_space(const AblationOptions& opt) {
    std::vector<SolverSpec> arms = {
        detail::arm("fio_identity", "fio", "fio_bank", {{"bank", "identity"}}),
        detail::arm("fio_deriv3", "fio", "fio_bank", {{"bank", "deriv3"}}),
        detail::arm("fio_identity_perfeat", "fio", "fio_bank",
                    {{"bank", "identity"}, {"order", "per_feature"}}),
        detail::arm("fio_deriv3_perfeat", "fio", "fio_bank",
                    {{"bank", "deriv3"}, {"order", "per_feature"}}),
    };
    ExperimentPlan plan = detail::ablation_plan(opt, "feature_space", {10.0}, std::move(arms));
    const RunPlanResult run = run_plan(plan);
    AblationReport rep = detail::summarize("feature_space", run, plan, "fio_identity", "fio_deriv3");
    const double delta_perfeat =
        mean_psnr(run.rows, "fio_deriv3_perfeat") - mean_psnr(run.rows, "fio_identity_perfeat");
    char buf[128];
    std::snprintf(buf, sizeof buf, "per-feature denoising order: delta_db = %.6f", delta_perfeat);
    rep.notes.push_back(buf);
    detail::write_verdict(rep, plan.output_dir);
    return rep;
}

/// Transform-denoise with and without the variance-stabilizing wrapper.
inline AblationReport ablate_vst(const AblationOptions& opt) {
    std::vector<SolverSpec> arms = {
        detail::arm("vstp_vst", "vstp", "vstp_vst", {{"vst", "true"}}),
        detail::arm("vstp_novst", "vstp", "vstp_vst", {{"vst", "false"}}),
    };
    ExperimentPlan plan = detail::ablation_plan(opt, "vst", {10.0, 30.0, 50.0}, std::move(arms));
    const RunPlanResult run = run_plan(plan);
    AblationReport rep = detail::summarize("vst", run, plan, "vstp_novst", "vstp_vst");
    detail::write_verdict(rep, plan.output_dir);
    return rep;
}

/// Deconvolve-then-denoise versus denoise-only on the blurred, noisy input.
inline AblationReport ablate_wiener_presence(const AblationOptions& opt) {
    std::vector<SolverSpec> arms = {
        detail::arm("tv_only", "tv", "wiener_presence"),
        detail::arm("wiener_tv", "wiener_tv", "wiener_presence"),
    };
    ExperimentPlan plan = detail::ablation_plan(opt, "wiener_presence", {10.0}, std::move(arms));
    const RunPlanResult run = run_plan(plan);
    AblationReport rep = detail::summarize("wiener_presence", run, plan, "tv_only", "wiener_tv");
    detail::write_verdict(rep, plan.output_dir);
    return rep;
}

/// Coordinate-descent search grids for the FIO schedule; the heuristic's own
/// values sit inside every grid so the tuner can never do worse on the
/// validation set.
inline TuneSpec fio_tune_spec(std::vector<ValidationCase> validation, int budget = 60) {
    TuneSpec spec;
    spec.objective = TuneObjective::psnr;
    spec.param_names = {"mu0_scale", "mu_ratio", "lambda", "denoiser.strength"};
    spec.param_grids = {{0.015, 0.03, 0.06, 0.12, 0.24},
                        {1.5, 2.0, 3.0},
                        {0.35, 0.7, 1.4},
                        {0.08, 0.15, 0.3}};
    spec.budget = budget;
    spec.validation = std::move(validation);
    return spec;
}

inline ParamMap fio_heuristic_params(int kernel_size) {
    return {{"mu0_scale", 0.06},
            {"mu_ratio", 2.0},
            {"lambda", heuristic_schedule(8, 30.0, kernel_size).lambda},
            {"denoiser.strength", 0.15}};
}

inline TunableSolver fio_tunable_solver(int iterations = 8) {
    return [iterations](const ImageGrid& y_norm, const BlurKernel& kernel, double alpha, double ppp,
                        const ParamMap& params) {
        KeyValues kv;
        kv.set("iters", std::to_string(iterations));
        for (const auto& [k, v] : params) kv.set_double(k, v);
        SolveOutput out = run_solver("fio", kv, {y_norm, kernel, alpha, ppp, nullptr});
        return out.restored;
    };
}

/// Searched schedule versus the hand-tuned heuristic: tunes on the first
/// half of the images (medium kernel 0, 30 ppp), evaluates both schedules on
/// the held-out second half across all medium kernels.
inline AblationReport ablate_tuned_params(const AblationOptions& opt, int budget = 60) {
    if (opt.images.size() < 2)
        throw ConfigError("ablate_tuned_params: need at least two images (validation + held-out)");
    const std::size_t split = opt.images.size() / 2;
    const std::vector<std::string> val_paths(opt.images.begin(), opt.images.begin() + split);
    const std::vector<std::string> held_out(opt.images.begin() + split, opt.images.end());

    const double ppp = 30.0;
    const BlurKernel kernel = make_class_kernel(KernelClass::medium, 0, opt.base_seed);
    std::vector<ValidationCase> validation;
    for (const auto& path : val_paths) {
        ValidationCase vc{detail::image_stem(path), read_image(path),
                          DegradationSpec{kernel, ppp, 0}};
        vc.degradation.seed = derive_seed(opt.base_seed,
                                          {"run", vc.id, "medium:0", format_ppp(ppp), "fio_tune_val"});
        validation.push_back(std::move(vc));
    }

    const TuneSpec spec = fio_tune_spec(std::move(validation), budget);
    const ParamMap start = fio_heuristic_params(kernel_class_size(KernelClass::medium));
    const TuneResult tuned = tune_schedule(fio_tunable_solver(), spec, start);

    SolverSpec tuned_arm = detail::arm("fio_tuned", "fio", "fio_tuned");
    for (const auto& [k, v] : tuned.best) tuned_arm.params.set_double(k, v);
    std::vector<SolverSpec> arms = {detail::arm("fio_heuristic", "fio", "fio_tuned"), tuned_arm};

    AblationOptions eval_opt = opt;
    eval_opt.images = held_out;
    ExperimentPlan plan = detail::ablation_plan(eval_opt, "tuned_params", {ppp}, std::move(arms));
    const RunPlanResult run = run_plan(plan);
    AblationReport rep = detail::summarize("tuned_params", run, plan, "fio_heuristic", "fio_tuned");

    const std::filesystem::path dir(plan.output_dir);
    params_to_config(tuned.best).write_file((dir / "tuned.conf").string());
    {
        std::ofstream trace(dir / "tune_trace.csv");
        trace << "evaluation";
        for (const auto& name : spec.param_names) trace << "," << name;
        trace << ",objective\n";
        char buf[64];
        for (std::size_t i = 0; i < tuned.trace.size(); ++i) {
            trace << i;
            for (const auto& name : spec.param_names) {
                std::snprintf(buf, sizeof buf, "%.17g", tuned.trace[i].params.at(name));
                trace << "," << buf;
            }
            std::snprintf(buf, sizeof buf, "%.9f", tuned.trace[i].objective);
            trace << "," << buf << "\n";
        }
    }
    char note[160];
    std::snprintf(note, sizeof note, "tuner: %d evaluations, best validation objective %.6f",
                  tuned.evaluations, tuned.best_objective);
    rep.notes.push_back(note);
    detail::write_verdict(rep, dir);
    return rep;
}

inline AblationReport run_ablation(const std::string& name, const AblationOptions& opt) {
    if (name == "iterations") return ablate_iterations(opt);
    if (name == "feature_space") return ablate_feature_space(opt);
    if (name == "vst") return ablate_vst(opt);
    if (name == "tuned_params") return ablate_tuned_params(opt);
    if (name == "wiener_presence") return ablate_wiener_presence(opt);
    throw ConfigError("unknown ablation '" + name +
                      "' (expected iterations|feature_space|vst|tuned_params|wiener_presence)");
}

} // namespace pdeconv
