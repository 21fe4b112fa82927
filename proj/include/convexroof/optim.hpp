#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "convexroof/types.hpp"

namespace convexroof {

struct OptimizationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// line search

struct LineSearchResult {
    double t_min = 0.0;
    double f_min = 0.0;
    int n_evals = 0;
};

namespace detail {
inline constexpr double golden_ratio = 1.618034;
inline constexpr double golden_section = 0.3819660112501051;  // 2 - golden ratio
inline constexpr int linmin_max_evals = 200;
inline constexpr double linmin_rel_tol = 1e-8;
inline constexpr double diverging_step = 1e6;
}  // namespace detail

/// Derivative-free scalar line minimization: golden-ratio bracketing from
/// t0 followed by Brent refinement (parabolic interpolation with
/// golden-section fallback). Never returns a point worse than t0.
inline LineSearchResult linmin(const std::function<double(double)>& f, double t0,
                               double initial_step) {
    int evals = 0;
    auto eval = [&](double t) {
        ++evals;
        return f(t);
    };

    double ax = t0, bx = t0 + initial_step;
    double fa = eval(ax), fb = eval(bx);
    const double f_start = fa;
    if (fb > fa) {
        std::swap(ax, bx);
        std::swap(fa, fb);
    }
    double cx = bx + detail::golden_ratio * (bx - ax);
    double fc = eval(cx);
    while (fb > fc) {
        if (std::abs(cx - t0) > detail::diverging_step)
            throw DivergingLineError("linmin: objective decreasing past step magnitude 1e6");
        if (evals >= detail::linmin_max_evals) break;
        // parabolic extrapolation from (a, b, c), limit the jump
        const double r = (bx - ax) * (fb - fc);
        const double q = (bx - cx) * (fb - fa);
        double denom = 2.0 * (q - r);
        if (std::abs(denom) < 1e-300) denom = denom >= 0 ? 1e-300 : -1e-300;
        double u = bx - ((bx - cx) * q - (bx - ax) * r) / denom;
        const double ulim = bx + 100.0 * (cx - bx);
        double fu;
        if ((bx - u) * (u - cx) > 0.0) {  // u between b and c
            fu = eval(u);
            if (fu < fc) {
                ax = bx; fa = fb; bx = u; fb = fu;
                break;
            } else if (fu > fb) {
                cx = u; fc = fu;
                break;
            }
            u = cx + detail::golden_ratio * (cx - bx);
            fu = eval(u);
        } else if ((cx - u) * (u - ulim) > 0.0) {  // u beyond c but inside limit
            fu = eval(u);
            if (fu < fc) {
                bx = cx; cx = u; u = cx + detail::golden_ratio * (cx - bx);
                fb = fc; fc = fu; fu = eval(u);
            }
        } else if ((u - ulim) * (ulim - cx) >= 0.0) {  // cap at ulim
            u = ulim;
            fu = eval(u);
        } else {  // reject parabolic u, golden-ratio step
            u = cx + detail::golden_ratio * (cx - bx);
            fu = eval(u);
        }
        ax = bx; bx = cx; cx = u;
        fa = fb; fb = fc; fc = fu;
    }

    // Brent refinement inside the bracket (ax, bx, cx)
    double lo = std::min(ax, cx), hi = std::max(ax, cx);
    double x = bx, w = bx, v = bx;
    double fx = fb, fw = fb, fv = fb;
    double d = 0.0, e = 0.0;
    while (evals < detail::linmin_max_evals) {
        const double xm = 0.5 * (lo + hi);
        const double tol1 = detail::linmin_rel_tol * std::abs(x) + 1e-12;
        const double tol2 = 2.0 * tol1;
        if (std::abs(x - xm) <= tol2 - 0.5 * (hi - lo)) break;
        bool use_golden = true;
        if (std::abs(e) > tol1) {
            const double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) p = -p;
            q = std::abs(q);
            const double e_prev = e;
            e = d;
            if (std::abs(p) < std::abs(0.5 * q * e_prev) && p > q * (lo - x) && p < q * (hi - x)) {
                d = p / q;
                double u = x + d;
                if (u - lo < tol2 || hi - u < tol2) d = (xm - x >= 0 ? tol1 : -tol1);
                use_golden = false;
            }
        }
        if (use_golden) {
            e = (x >= xm) ? lo - x : hi - x;
            d = detail::golden_section * e;
        }
        const double u = (std::abs(d) >= tol1) ? x + d : x + (d >= 0 ? tol1 : -tol1);
        const double fu = eval(u);
        if (fu <= fx) {
            if (u >= x) lo = x; else hi = x;
            v = w; w = x; x = u;
            fv = fw; fw = fx; fx = fu;
        } else {
            if (u < x) lo = u; else hi = u;
            if (fu <= fw || w == x) {
                v = w; fv = fw; w = u; fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u; fv = fu;
            }
        }
    }

    if (fx > f_start) return {t0, f_start, evals};  // never worse than the starting point
    return {x, fx, evals};
}

// ---------------------------------------------------------------------------
// convergence bookkeeping

struct Tolerances {
    double g_tol = 1e-9;
    double f_tol = 1e-12;
    int max_iter = 1000;
    int stall_window = 5;
};

enum class StopReason { none, gradient, stalled, max_iter, diverged };

inline const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::gradient: return "gradient";
        case StopReason::stalled: return "stalled";
        case StopReason::max_iter: return "max-iter";
        case StopReason::diverged: return "diverged";
        default: return "none";
    }
}

/// Objective, gradient norm, and wall time per accepted iterate, plus the
/// termination reason. Iterate 0 is the starting point.
struct RunTrace {
    std::vector<double> objective;
    std::vector<double> grad_norm;
    std::vector<double> seconds;
    StopReason reason = StopReason::none;

    int iterations() const { return static_cast<int>(objective.size()) - 1; }
};

/// Stopping decision for the current trace: gradient norm below g_tol,
/// relative objective decrease below f_tol over `stall_window` consecutive
/// iterations, or the iteration cap.
inline std::optional<StopReason> converged(const RunTrace& trace, const Tolerances& tol) {
    if (trace.objective.empty()) throw InvalidInputError("converged: empty trace");
    if (!trace.grad_norm.empty() && trace.grad_norm.back() < tol.g_tol)
        return StopReason::gradient;
    const int n = static_cast<int>(trace.objective.size());
    if (n >= tol.stall_window + 1) {
        bool stalled = true;
        for (int i = n - tol.stall_window; i < n; ++i) {
            const double prev = trace.objective[i - 1], cur = trace.objective[i];
            const double rel = (prev - cur) / std::max(1.0, std::abs(prev));
            if (rel >= tol.f_tol) {
                stalled = false;
                break;
            }
        }
        if (stalled) return StopReason::stalled;
    }
    if (n - 1 >= tol.max_iter) return StopReason::max_iter;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// multistart orchestration

/// Bounded worker count: CONVEXROOF_THREADS if set, else hardware concurrency.
inline int worker_budget(int n_jobs) {
    int budget = 0;
    if (const char* env = std::getenv("CONVEXROOF_THREADS")) budget = std::atoi(env);
    if (budget <= 0) budget = static_cast<int>(std::thread::hardware_concurrency());
    if (budget <= 0) budget = 1;
    return std::min(budget, std::max(1, n_jobs));
}

/// Run fn(0..n-1) on a bounded pool; results are merged by index, so the
/// outcome does not depend on scheduling.
inline void parallel_indexed(int n, const std::function<void(int)>& fn) {
    const int workers = worker_budget(n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    for (auto& t : pool) t.join();
}

struct RestartReport {
    int n_restarts = 0;
    std::vector<double> final_values;      // NaN where the restart failed
    std::vector<bool> restart_failed;
    double best_value = std::numeric_limits<double>::quiet_NaN();
    int best_index = -1;
    /// Fraction of restarts with |value - oracle| < 1e-6; NaN without oracle.
    double success_rate = std::numeric_limits<double>::quiet_NaN();
};

inline constexpr double success_error_threshold = 1e-6;

/// Multistart driver: restart i runs with the derived seed mix_seed(seed, i),
/// so reports are reproducible and independent of execution order.
/// Individual restart failures are recorded; only total failure throws.
template <typename RunFn>
RestartReport run_with_restarts(RunFn&& run, int n_restarts, std::uint64_t seed,
                                std::optional<double> oracle = std::nullopt) {
    if (n_restarts < 1) throw InvalidInputError("run_with_restarts: need at least one restart");
    RestartReport report;
    report.n_restarts = n_restarts;
    report.final_values.assign(n_restarts, std::numeric_limits<double>::quiet_NaN());
    report.restart_failed.assign(n_restarts, true);
    parallel_indexed(n_restarts, [&](int i) {
        try {
            report.final_values[i] = run(mix_seed(seed, static_cast<std::uint64_t>(i)), i);
            report.restart_failed[i] = false;
        } catch (const std::exception&) {
            // recorded as failed; not fatal unless every restart fails
        }
    });
    for (int i = 0; i < n_restarts; ++i) {
        if (report.restart_failed[i]) continue;
        if (report.best_index < 0 || report.final_values[i] < report.best_value) {
            report.best_value = report.final_values[i];
            report.best_index = i;
        }
    }
    if (report.best_index < 0) throw OptimizationFailure("run_with_restarts: every restart failed");
    if (oracle) {
        int hits = 0;
        for (int i = 0; i < n_restarts; ++i)
            if (!report.restart_failed[i] &&
                std::abs(report.final_values[i] - *oracle) < success_error_threshold)
                ++hits;
        report.success_rate = static_cast<double>(hits) / n_restarts;
    }
    return report;
}

}  // namespace convexroof
