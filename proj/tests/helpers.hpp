#pragma once

#include <functional>

#include "convexroof/density.hpp"
#include "convexroof/ensembles.hpp"
#include "convexroof/measures.hpp"

namespace testutil {

using namespace convexroof;

/// Fourth-order central difference: (f(-2h) - 8 f(-h) + 8 f(h) - f(2h)) / 12h.
inline double central_diff(const std::function<double(double)>& f, double h) {
    return (f(-2 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2 * h)) / (12.0 * h);
}

/// Max relative deviation between an analytic measure gradient and central
/// finite differences, denominator floored at 1e-8.
inline double gradient_fd_error(const Measure& m, const Vector& psi, double step = 1e-5) {
    const MeasureGradient an = m.gradient(psi);
    double worst = 0.0;
    Vector p = psi;
    for (Index i = 0; i < psi.size(); ++i) {
        const Complex orig = p[i];
        const double fd_re = central_diff(
            [&](double h) {
                p[i] = orig + h;
                const double v = m.value(p);
                p[i] = orig;
                return v;
            },
            step);
        const double fd_im = central_diff(
            [&](double h) {
                p[i] = orig + Complex(0, h);
                const double v = m.value(p);
                p[i] = orig;
                return v;
            },
            step);
        const double dre = std::abs(an.d_re[i] - fd_re) / std::max(std::abs(fd_re), 1e-8);
        const double dim = std::abs(an.d_im[i] - fd_im) / std::max(std::abs(fd_im), 1e-8);
        worst = std::max({worst, dre, dim});
    }
    return worst;
}

/// Central finite differences of h with respect to the real and imaginary
/// parts of the Stiefel matrix entries.
inline ObjectiveGradient objective_fd(const DensityMatrix& rho, const StiefelPoint& u,
                                      const Measure& m, double step = 1e-5) {
    ObjectiveGradient g{RealMatrix(u.k, u.r), RealMatrix(u.k, u.r)};
    StiefelPoint w = u;
    for (Index i = 0; i < u.k; ++i)
        for (Index l = 0; l < u.r; ++l) {
            const Complex orig = w.u(i, l);
            auto h_at = [&](Complex delta) {
                w.u(i, l) = orig + delta;
                const double v = objective_h(rho, w, m);
                w.u(i, l) = orig;
                return v;
            };
            g.d_re(i, l) = central_diff([&](double h) { return h_at(Complex(h, 0)); }, step);
            g.d_im(i, l) = central_diff([&](double h) { return h_at(Complex(0, h)); }, step);
        }
    return g;
}

inline double max_rel_error(const RealMatrix& a, const RealMatrix& b, double floor = 1e-8) {
    double worst = 0.0;
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            worst = std::max(worst,
                             std::abs(a(i, j) - b(i, j)) / std::max(std::abs(b(i, j)), floor));
    return worst;
}

/// Random Hermitian matrix with entries of order 1.
inline Matrix random_hermitian(Index n, Rng& rng) {
    const Matrix g = random_gaussian_matrix(n, n, rng);
    return 0.5 * (g + g.adjoint());
}

/// Random skew-Hermitian matrix.
inline Matrix random_skew(Index n, Rng& rng) {
    const Matrix g = random_gaussian_matrix(n, n, rng);
    return 0.5 * (g - g.adjoint());
}

}  // namespace testutil
