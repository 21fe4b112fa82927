#pragma once

#include <chrono>
#include <optional>
#include <utility>

#include "convexroof/ensembles.hpp"
#include "convexroof/linalg.hpp"
#include "convexroof/optim.hpp"

namespace convexroof {

/// Real inner product tr(X Y^dag) used on the tangent spaces of U(k).
/// For skew-Hermitian arguments the trace is real up to rounding.
inline double skew_inner(const Matrix& x, const Matrix& y) {
    return (x * y.adjoint()).trace().real();
}

/// Euclidean gradient of h at the unitary u, as the pair of real k x k
/// matrices (dh/dRe U, dh/dIm U). Only the first r columns feed the
/// ensemble; the remaining columns carry zero gradient.
inline ObjectiveGradient euclidean_gradient_full(const DensityMatrix& rho, const Matrix& u,
                                                 const Measure& m) {
    const Index k = u.rows();
    const Index r = rho.rank();
    StiefelPoint block{k, r, u.leftCols(r)};
    const ObjectiveGradient g = objective_gradient(rho, block, m);
    ObjectiveGradient full{RealMatrix::Zero(k, k), RealMatrix::Zero(k, k)};
    full.d_re.leftCols(r) = g.d_re;
    full.d_im.leftCols(r) = g.d_im;
    return full;
}

/// Riemannian gradient of h on U(k) at u: sorting the directional
/// derivative along u exp(eps X) by Re X and Im X gives
///   A = (Re u)^T dRe + (Im u)^T dIm,  S = (Re u)^T dIm - (Im u)^T dRe,
///   G_kl = (A_kl - A_lk)/2 + i (S_kl + S_lk)/2,
/// which is skew-Hermitian by construction.
inline Matrix riemannian_gradient(const DensityMatrix& rho, const Matrix& u, const Measure& m) {
    if (u.rows() != u.cols()) throw InvalidInputError("riemannian_gradient: u must be square");
    if (u.rows() < rho.rank())
        throw InvalidInputError("riemannian_gradient: cardinality below rank");
    const ObjectiveGradient eg = euclidean_gradient_full(rho, u, m);
    const RealMatrix re_u = u.real();
    const RealMatrix im_u = u.imag();
    const RealMatrix a = re_u.transpose() * eg.d_re + im_u.transpose() * eg.d_im;
    const RealMatrix s = re_u.transpose() * eg.d_im - im_u.transpose() * eg.d_re;
    const RealMatrix a_skew = 0.5 * (a - a.transpose());
    const RealMatrix s_symm = 0.5 * (s + s.transpose());
    return a_skew.cast<Complex>() + Complex(0, 1) * s_symm.cast<Complex>();
}

/// One geodesic step u exp(t x).
inline Matrix geodesic_step(const Matrix& u, const Matrix& x, double t) {
    return u * factor_skew(x).at(t);
}

/// Parallel transport of the tangent vector g along the geodesic generated
/// by x for parameter t: exp(t x / 2) g exp(-t x / 2).
inline Matrix parallel_transport(const Matrix& g, const Matrix& x, double t) {
    const SkewExpFactors f = factor_skew(x);
    const Matrix half = f.at(0.5 * t);
    return half * g * half.adjoint();
}

/// Modified Polak-Ribiere parameter <G_new - T, G_new> / <G_old, G_old>.
/// A vanishing denominator signals convergence (nullopt), not an error.
inline std::optional<double> pr_gamma(const Matrix& g_new, const Matrix& transported,
                                      const Matrix& g_old) {
    const double denom = skew_inner(g_old, g_old);
    if (denom < 1e-30) return std::nullopt;
    return skew_inner(g_new - transported, g_new) / denom;
}

struct CgConfig {
    Tolerances tol;
    double initial_step = 1.0;      // line-search step in geodesic parameter t
    int reorth_interval = 50;       // QR re-orthonormalization cadence
    double reorth_threshold = 1e-8; // and drift trigger
};

namespace detail {

inline Matrix reorthonormalize_unitary(const Matrix& u) {
    Eigen::HouseholderQR<Matrix> qr(u);
    Matrix q = qr.householderQ();
    const Matrix r = q.adjoint() * u;
    for (Index j = 0; j < u.cols(); ++j) {
        const Complex d = r(j, j);
        const double a = std::abs(d);
        if (a > 0) q.col(j) *= d / a;
    }
    return q;
}

}  // namespace detail

/// Geodesic conjugate-gradient minimization of h over U(k), taking the
/// first r columns as the reported Stiefel point. `u0` overrides the
/// starting unitary; by default a Haar-random one is drawn from the rng.
inline MinimizeResult cg_minimize(const DensityMatrix& rho, const Measure& m, Index k,
                                  const CgConfig& config, Rng& rng,
                                  std::optional<Matrix> u0 = std::nullopt) {
    const Index r = rho.rank();
    if (k < r) throw InvalidInputError("cg_minimize: cardinality below rank");
    Matrix u = u0 ? std::move(*u0) : random_unitary(k, rng);

    auto h_of = [&](const Matrix& w) {
        return objective_h(rho, StiefelPoint{k, r, w.leftCols(r)}, m);
    };

    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    };

    MinimizeResult result;
    RunTrace& trace = result.trace;
    double f = h_of(u);
    Matrix g = riemannian_gradient(rho, u, m);
    trace.objective.push_back(f);
    trace.grad_norm.push_back(g.norm());
    trace.seconds.push_back(elapsed());

    Matrix x = -g;
    const int reset_interval = static_cast<int>(k * k);
    int since_reset = 0;

    while (true) {
        if (auto stop = converged(trace, config.tol)) {
            trace.reason = *stop;
            break;
        }
        const SkewExpFactors step_factors = factor_skew(x);
        LineSearchResult ls;
        bool diverged = false;
        try {
            ls = linmin([&](double t) { return h_of(u * step_factors.at(t)); }, 0.0,
                        config.initial_step);
        } catch (const DivergingLineError&) {
            diverged = true;
        }
        if (diverged || ls.f_min > f) {
            // reset to steepest descent; if that also fails, stop
            if (since_reset == 0) {
                trace.reason = StopReason::diverged;
                break;
            }
            x = -g;
            since_reset = 0;
            continue;
        }

        u = u * step_factors.at(ls.t_min);
        ++since_reset;
        const bool drifted =
            (u.adjoint() * u - Matrix::Identity(k, k)).norm() > config.reorth_threshold;
        if (drifted || since_reset % config.reorth_interval == 0)
            u = detail::reorthonormalize_unitary(u);

        f = h_of(u);
        const Matrix g_new = riemannian_gradient(rho, u, m);
        const Matrix transported =
            step_factors.at(0.5 * ls.t_min) * g * step_factors.at(-0.5 * ls.t_min);
        const std::optional<double> gamma = pr_gamma(g_new, transported, g);

        trace.objective.push_back(f);
        trace.grad_norm.push_back(g_new.norm());
        trace.seconds.push_back(elapsed());
        g = g_new;

        if (!gamma) {
            trace.reason = StopReason::gradient;
            break;
        }
        if (*gamma < 0.0 || since_reset >= reset_interval) {
            x = -g;
            since_reset = 0;
        } else {
            x = -g + *gamma * x;
        }
    }

    result.value = trace.objective.back();
    result.point = StiefelPoint{k, r, u.leftCols(r)};
    return result;
}

}  // namespace convexroof
