#pragma once

#include <optional>
#include <string>
#include <utility>

#include "convexroof/euler_hurwitz.hpp"
#include "convexroof/stiefel_cg.hpp"

namespace convexroof {

enum class Algorithm { cg, qn };

inline const char* to_string(Algorithm a) { return a == Algorithm::cg ? "cg" : "qn"; }

inline Algorithm algorithm_from_string(const std::string& s) {
    if (s == "cg") return Algorithm::cg;
    if (s == "qn") return Algorithm::qn;
    throw InvalidInputError("unknown algorithm '" + s + "' (expected cg or qn)");
}

struct RoofConfig {
    Algorithm algorithm = Algorithm::cg;
    Index cardinality = 0;  // 0: default rank + 4
    int restarts = 10;
    std::uint64_t seed = 1;
    Tolerances tol;
    /// Prepend one deterministic restart from the eigen-ensemble (identity
    /// Stiefel point); guarantees the result never exceeds h(identity).
    bool identity_start = true;
};

struct RoofResult {
    double value = 0.0;
    StiefelPoint point;
    RunTrace best_trace;
    RestartReport report;
    Index cardinality = 0;
    Algorithm algorithm = Algorithm::cg;
};

namespace detail {

inline RealVector identity_angles(Index k, Index r) {
    const Index np = EulerHurwitzAngles::pair_count(k, r);
    return RealVector::Zero(2 * np + r);
}

}  // namespace detail

/// Single optimization run with the chosen algorithm. Restart index 0 with
/// identity_start begins at the eigen-ensemble; all others start random.
inline MinimizeResult roof_single_run(const DensityMatrix& rho, const Measure& m, Index k,
                                      const RoofConfig& config, std::uint64_t run_seed,
                                      bool from_identity) {
    Rng rng(run_seed);
    if (config.algorithm == Algorithm::cg) {
        CgConfig cg;
        cg.tol = config.tol;
        std::optional<Matrix> u0;
        if (from_identity) u0 = Matrix::Identity(k, k);
        return cg_minimize(rho, m, k, cg, rng, std::move(u0));
    }
    QnConfig qn;
    qn.tol = config.tol;
    std::optional<RealVector> a0;
    if (from_identity) a0 = detail::identity_angles(k, rho.rank());
    return qn_minimize(rho, m, k, qn, rng, std::move(a0));
}

/// Convex-roof value M(rho) = min over restarts of the chosen optimizer.
inline RoofResult convex_roof(const DensityMatrix& rho, const Measure& m,
                              const RoofConfig& config,
                              std::optional<double> oracle = std::nullopt) {
    if (!m.applicable(rho.dim()))
        throw InvalidInputError("measure '" + m.name + "' not applicable to dimension " +
                                std::to_string(rho.dim()));
    const Index k = config.cardinality > 0 ? config.cardinality : default_cardinality(rho);
    if (k < rho.rank()) throw InvalidInputError("convex_roof: cardinality below rank");

    const int n_runs = config.restarts + (config.identity_start ? 1 : 0);
    std::vector<MinimizeResult> runs(n_runs);
    RestartReport report = run_with_restarts(
        [&](std::uint64_t run_seed, int index) {
            const bool from_identity = config.identity_start && index == 0;
            runs[index] = roof_single_run(rho, m, k, config, run_seed, from_identity);
            return runs[index].value;
        },
        n_runs, config.seed, oracle);

    RoofResult out;
    out.value = report.best_value;
    out.point = std::move(runs[report.best_index].point);
    out.best_trace = std::move(runs[report.best_index].trace);
    out.report = std::move(report);
    out.cardinality = k;
    out.algorithm = config.algorithm;
    return out;
}

}  // namespace convexroof
