#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pdeconv/config.hpp"
#include "pdeconv/image.hpp"
#include "pdeconv/metrics.hpp"
#include "pdeconv/solvers.hpp"
#include "pdeconv/synth.hpp"

namespace pdeconv {

/// Geometric penalty ramp mu_k = mu0 * r^(k-1) with r = 2 and a noise-aware
/// floor mu0 proportional to the photon level; the prior weight is fixed per
/// kernel-size class. This is the hand-tuned baseline the tuner competes
/// against.
inline HqsSchedule heuristic_schedule(int iterations, double ppp, int kernel_size) {
    if (iterations < 1) throw ConfigError("heuristic_schedule: iterations must be >= 1");
    if (ppp <= 0.0) throw ConfigError("heuristic_schedule: ppp must be positive");
    HqsSchedule s;
    const double mu0 = 0.06 * ppp;
    s.mu.resize(static_cast<std::size_t>(iterations));
    for (int k = 0; k < iterations; ++k) s.mu[static_cast<std::size_t>(k)] = mu0 * std::pow(2.0, k);
    if (kernel_size <= 15)
        s.lambda = 0.5;
    else if (kernel_size <= 35)
        s.lambda = 0.7;
    else
        s.lambda = 1.0;
    return s;
}

enum class TuneObjective { psnr, l1 };

/// One validation instance: a clean reference plus the degradation applied
/// to it. Observations are drawn once up front so every candidate sees the
/// same data.
struct ValidationCase {
    std::string id;
    ImageGrid clean;
    DegradationSpec degradation;
};

/// Per-parameter candidate values (log-spaced grids are the caller's
/// choice), the evaluation budget, and the validation set.
struct TuneSpec {
    TuneObjective objective = TuneObjective::psnr;
    std::vector<std::string> param_names;
    std::vector<std::vector<double>> param_grids;
    int budget = 60;
    std::vector<ValidationCase> validation;
};

using ParamMap = std::map<std::string, double>;

/// Candidate evaluator: solves every validation case under `params` and
/// returns the restored image for scoring.
using TunableSolver = std::function<ImageGrid(const ImageGrid& y_norm, const BlurKernel& kernel,
                                              double alpha, double ppp, const ParamMap& params)>;

struct TuneTraceEntry {
    ParamMap params;
    double objective = 0.0;
};

struct TuneResult {
    ParamMap best;
    double best_objective = 0.0;
    std::vector<TuneTraceEntry> trace;
    int evaluations = 0;
};

namespace detail {

struct PreparedCase {
    const ValidationCase* vc;
    ImageGrid y_norm;
    double alpha;
};

inline std::string param_key(const ParamMap& p) {
    std::string key;
    char buf[64];
    for (const auto& [name, value] : p) {
        std::snprintf(buf, sizeof buf, "%.17g", value);
        key += name;
        key += '=';
        key += buf;
        key += ';';
    }
    return key;
}

} // namespace detail

/// Derivative-free coordinate descent over the per-parameter grids: cycle
/// through parameters, keep the best value of each, stop when the budget is
/// spent or a full pass makes no progress. Deterministic given the spec;
/// repeated configurations are served from a cache without consuming budget.
inline TuneResult tune_schedule(const TunableSolver& solver, const TuneSpec& spec,
                                const ParamMap& start) {
    if (spec.validation.empty()) throw ConfigError("tune_schedule: empty validation set");
    if (spec.param_names.size() != spec.param_grids.size())
        throw ConfigError("tune_schedule: one grid per parameter required");
    for (const auto& grid : spec.param_grids)
        if (grid.empty()) throw ConfigError("tune_schedule: empty parameter grid");

    // one full coordinate pass must fit in the budget
    int pass_cost = 1;
    for (const auto& grid : spec.param_grids) pass_cost += static_cast<int>(grid.size()) - 1;
    if (spec.budget < pass_cost)
        throw ConfigError("tune_schedule: budget " + std::to_string(spec.budget) +
                          " below one coordinate pass (" + std::to_string(pass_cost) + ")");

    std::vector<detail::PreparedCase> cases;
    cases.reserve(spec.validation.size());
    for (const auto& vc : spec.validation) {
        Degraded d = degrade(vc.clean, vc.degradation);
        ImageGrid y_norm = d.counts;
        for (double& v : y_norm.pixels()) v /= d.alpha;
        cases.push_back({&vc, std::move(y_norm), d.alpha});
    }

    TuneResult result;
    std::map<std::string, double> cache;

    auto evaluate = [&](const ParamMap& params) {
        const std::string key = detail::param_key(params);
        auto hit = cache.find(key);
        if (hit != cache.end()) return hit->second;
        if (result.evaluations >= spec.budget)
            throw ConfigError("tune_schedule: evaluation budget exhausted");
        double acc = 0.0;
        for (const auto& pc : cases) {
            const ImageGrid restored =
                solver(pc.y_norm, pc.vc->degradation.kernel, pc.alpha, pc.vc->degradation.ppp, params);
            if (spec.objective == TuneObjective::psnr) {
                acc += psnr(pc.vc->clean, restored);
            } else {
                double l1 = 0.0;
                for (std::size_t p = 0; p < restored.size(); ++p)
                    l1 += std::fabs(restored.pixels()[p] - pc.vc->clean.pixels()[p]);
                acc -= l1 / static_cast<double>(restored.size());
            }
        }
        const double score = acc / static_cast<double>(cases.size());
        ++result.evaluations;
        cache[key] = score;
        result.trace.push_back({params, score});
        return score;
    };

    ParamMap current = start;
    // snap the starting point onto each grid
    for (std::size_t p = 0; p < spec.param_names.size(); ++p) {
        const auto& grid = spec.param_grids[p];
        auto it = current.find(spec.param_names[p]);
        const double want = it == current.end() ? grid.front() : it->second;
        double best = grid.front();
        for (double v : grid)
            if (std::fabs(v - want) < std::fabs(best - want)) best = v;
        current[spec.param_names[p]] = best;
    }

    double best_score = evaluate(current);
    bool improved = true;
    while (improved && result.evaluations < spec.budget) {
        improved = false;
        for (std::size_t p = 0; p < spec.param_names.size(); ++p) {
            const std::string& name = spec.param_names[p];
            double best_value = current[name];
            for (double v : spec.param_grids[p]) {
                if (v == best_value) continue;
                if (result.evaluations >= spec.budget) break;
                ParamMap candidate = current;
                candidate[name] = v;
                const double score = evaluate(candidate);
                if (score > best_score) {
                    best_score = score;
                    best_value = v;
                    improved = true;
                }
            }
            current[name] = best_value;
        }
    }

    result.best = current;
    result.best_objective = best_score;

    // the returned config must be the trace argmax
    for (const auto& entry : result.trace)
        if (entry.objective > result.best_objective) {
            result.best_objective = entry.objective;
            result.best = entry.params;
        }
    return result;
}

inline KeyValues params_to_config(const ParamMap& params) {
    KeyValues kv;
    for (const auto& [name, value] : params) kv.set_double(name, value);
    return kv;
}

inline ParamMap config_to_params(const KeyValues& kv) {
    ParamMap out;
    for (const auto& [key, value] : kv.items()) out[key] = kv.get_double(key);
    return out;
}

} // namespace pdeconv
