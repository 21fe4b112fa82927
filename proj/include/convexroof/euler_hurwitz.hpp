#pragma once

#include <chrono>
#include <cmath>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "convexroof/ensembles.hpp"
#include "convexroof/linalg.hpp"
#include "convexroof/optim.hpp"

namespace convexroof {

/// Unique angle parametrization of St(k, r): one (theta, phi) pair per
/// Givens rotation of the decomposition sweep plus one residual phase chi
/// per column. Canonical ranges theta in [0, pi/2], phi in (-pi, pi),
/// chi in (-pi, pi]; reconstruction accepts arbitrary reals (periodic).
struct EulerHurwitzAngles {
    Index k = 0;
    Index r = 0;
    RealVector theta;  // length r*k - r*(r+1)/2
    RealVector phi;    // same length
    RealVector chi;    // length r

    static Index pair_count(Index k, Index r) { return r * k - r * (r + 1) / 2; }

    /// Total parameter count = dim St(k, r) = 2kr - r^2.
    Index count() const { return 2 * pair_count(k, r) + r; }

    /// Flat layout [theta..., phi..., chi...] used by the optimizer.
    RealVector flatten() const {
        RealVector v(count());
        v << theta, phi, chi;
        return v;
    }

    static EulerHurwitzAngles unflatten(const RealVector& v, Index k, Index r) {
        const Index np = pair_count(k, r);
        if (v.size() != 2 * np + r)
            throw InvalidInputError("EulerHurwitzAngles: flat vector length mismatch");
        EulerHurwitzAngles a{k, r, v.segment(0, np), v.segment(np, np), v.segment(2 * np, r)};
        return a;
    }
};

/// Complex Givens rotation acting on rows s and s+1 (0-based s).
struct GivensRotation {
    Index s = 0;
    double theta = 0.0;
    double phi = 0.0;
};

/// Left-multiplication by G_s(theta, phi):
///   row_s   <-  e^{i phi} cos(theta) row_s + e^{-i phi} sin(theta) row_{s+1}
///   row_s+1 <- -e^{i phi} sin(theta) row_s + e^{-i phi} cos(theta) row_{s+1}
inline Matrix givens_apply(const Matrix& a, const GivensRotation& g) {
    if (g.s < 0 || g.s + 1 >= a.rows())
        throw InvalidInputError("givens_apply: row index out of range");
    Matrix out = a;
    const Complex ep = std::exp(Complex(0.0, g.phi));
    const Complex em = std::conj(ep);
    const double c = std::cos(g.theta), s = std::sin(g.theta);
    out.row(g.s) = ep * c * a.row(g.s) + em * s * a.row(g.s + 1);
    out.row(g.s + 1) = -ep * s * a.row(g.s) + em * c * a.row(g.s + 1);
    return out;
}

/// Angles that zero the lower of two stacked entries: with x = |x| e^{i phi_x},
/// y = |y| e^{i phi_y} (phases in (-pi, pi]), theta = arctan(|y|/|x|),
/// phi = (phi_y - phi_x)/2. Degenerate magnitudes below 1e-15 are treated
/// as exact zeros: x = 0 gives (pi/2, 0), y = 0 gives (0, 0).
inline std::pair<double, double> angles_for_zero(Complex x_entry, Complex y_entry) {
    const double x = std::abs(x_entry), y = std::abs(y_entry);
    if (y < 1e-15) return {0.0, 0.0};
    if (x < 1e-15) return {std::numbers::pi / 2.0, 0.0};
    const double theta = std::atan2(y, x);
    const double phi = 0.5 * (std::arg(y_entry) - std::arg(x_entry));
    return {theta, phi};
}

namespace detail {

/// Flat index of the (column c, row s) Givens pair; the sweep runs columns
/// left to right, rows bottom to top (s = k-2 down to c).
inline Index givens_index(Index k, Index c, Index s) {
    const Index offset = c * (k - 1) - c * (c - 1) / 2;
    return offset + (k - 2 - s);
}

/// In-place adjoint Givens on two rows of a k x r matrix.
inline void apply_adjoint_rows(Matrix& b, Index s, double theta, double phi) {
    const Complex em = std::exp(Complex(0.0, -phi));
    const Complex ep = std::conj(em);
    const double c = std::cos(theta), sn = std::sin(theta);
    const Eigen::RowVectorXcd top = b.row(s);
    b.row(s) = em * (c * top - sn * b.row(s + 1));
    b.row(s + 1) = ep * (sn * top + c * b.row(s + 1));
}

}  // namespace detail

/// Decompose a Stiefel matrix into its Euler-Hurwitz angles by zeroing
/// entries column by column (left to right), bottom to top; the residual
/// upper block is a diagonal of phases e^{i chi}.
inline EulerHurwitzAngles decompose(const StiefelPoint& a, double tol = 1e-10) {
    if (a.orthonormality_defect() > tol)
        throw InvalidInputError("decompose: input is not a Stiefel matrix");
    const Index k = a.k, r = a.r;
    const Index np = EulerHurwitzAngles::pair_count(k, r);
    EulerHurwitzAngles out{k, r, RealVector::Zero(np), RealVector::Zero(np), RealVector::Zero(r)};
    Matrix work = a.u;
    for (Index c = 0; c < r; ++c) {
        for (Index s = k - 2; s >= c; --s) {
            const auto [theta, phi] = angles_for_zero(work(s, c), work(s + 1, c));
            const Index idx = detail::givens_index(k, c, s);
            out.theta[idx] = theta;
            out.phi[idx] = phi;
            work = givens_apply(work, GivensRotation{s, theta, phi});
            work(s + 1, c) = 0.0;  // exact zero by construction
        }
    }
    for (Index i = 0; i < r; ++i) out.chi[i] = std::arg(work(i, i));
    return out;
}

/// Inverse map: fill a k x r matrix with diagonal phases e^{i chi_i} and
/// apply the adjoint Givens rotations in reverse sweep order. Total on all
/// real angle vectors; the result is a Stiefel matrix for any input.
inline StiefelPoint reconstruct(const EulerHurwitzAngles& angles, Index k, Index r) {
    const Index np = EulerHurwitzAngles::pair_count(k, r);
    if (angles.theta.size() != np || angles.phi.size() != np || angles.chi.size() != r)
        throw InvalidInputError("reconstruct: angle vector lengths inconsistent with (k, r)");
    Matrix b = Matrix::Zero(k, r);
    for (Index i = 0; i < r; ++i) b(i, i) = std::exp(Complex(0.0, angles.chi[i]));
    for (Index c = r - 1; c >= 0; --c)
        for (Index s = c; s <= k - 2; ++s) {
            const Index idx = detail::givens_index(k, c, s);
            detail::apply_adjoint_rows(b, s, angles.theta[idx], angles.phi[idx]);
        }
    return StiefelPoint{k, r, std::move(b)};
}

/// Derivative of the reconstruction map with respect to every angle, as a
/// list of k x r matrices in flat-layout order [theta..., phi..., chi...].
/// Each angle appears in exactly one factor of the product, so the
/// derivative replaces that factor by its analytic derivative.
inline std::vector<Matrix> reconstruct_jacobian(const EulerHurwitzAngles& angles, Index k,
                                                Index r) {
    const Index np = EulerHurwitzAngles::pair_count(k, r);
    if (angles.theta.size() != np || angles.phi.size() != np || angles.chi.size() != r)
        throw InvalidInputError("reconstruct_jacobian: angle vector lengths inconsistent");

    // ops in application order (c = r-1 down to 0, s = c up to k-2)
    struct Op {
        Index s;
        Index idx;
    };
    std::vector<Op> ops;
    ops.reserve(np);
    for (Index c = r - 1; c >= 0; --c)
        for (Index s = c; s <= k - 2; ++s) ops.push_back({s, detail::givens_index(k, c, s)});

    // forward pass, storing the state before each op
    std::vector<Matrix> states;
    states.reserve(np + 1);
    Matrix b = Matrix::Zero(k, r);
    for (Index i = 0; i < r; ++i) b(i, i) = std::exp(Complex(0.0, angles.chi[i]));
    for (const Op& op : ops) {
        states.push_back(b);
        detail::apply_adjoint_rows(b, op.s, angles.theta[op.idx], angles.phi[op.idx]);
    }
    states.push_back(b);

    auto push_through_tail = [&](Matrix z, std::size_t from) {
        for (std::size_t t = from; t < ops.size(); ++t)
            detail::apply_adjoint_rows(z, ops[t].s, angles.theta[ops[t].idx],
                                       angles.phi[ops[t].idx]);
        return z;
    };

    std::vector<Matrix> jac(2 * np + r);
    for (std::size_t t = 0; t < ops.size(); ++t) {
        const Index s = ops[t].s;
        const Index idx = ops[t].idx;
        const double th = angles.theta[idx], ph = angles.phi[idx];
        const Complex em = std::exp(Complex(0.0, -ph));
        const Complex ep = std::conj(em);
        const double c = std::cos(th), sn = std::sin(th);
        const Matrix& m = states[t];

        Matrix dth = Matrix::Zero(k, r);
        dth.row(s) = em * (-sn * m.row(s) - c * m.row(s + 1));
        dth.row(s + 1) = ep * (c * m.row(s) - sn * m.row(s + 1));
        jac[idx] = push_through_tail(std::move(dth), t + 1);

        Matrix dph = Matrix::Zero(k, r);
        dph.row(s) = Complex(0.0, -1.0) * em * (c * m.row(s) - sn * m.row(s + 1));
        dph.row(s + 1) = Complex(0.0, 1.0) * ep * (sn * m.row(s) + c * m.row(s + 1));
        jac[np + idx] = push_through_tail(std::move(dph), t + 1);
    }
    for (Index i = 0; i < r; ++i) {
        Matrix dchi = Matrix::Zero(k, r);
        dchi(i, i) = Complex(0.0, 1.0) * std::exp(Complex(0.0, angles.chi[i]));
        jac[2 * np + i] = push_through_tail(std::move(dchi), 0);
    }
    return jac;
}

// ---------------------------------------------------------------------------
// quasi-Newton driver

struct QnConfig {
    Tolerances tol;
    double initial_step = 0.1;  // line-search step in angle space
    int curvature_fail_reset = 3;
};

struct BfgsResult {
    RealVector x;
    double value = 0.0;
    RunTrace trace;
};

/// BFGS quasi-Newton minimization over unconstrained reals with the
/// derivative-free linmin line search. The inverse-Hessian approximation
/// starts at identity; secant pairs failing the curvature condition skip
/// the update (steepest-descent step instead), and three consecutive
/// failures reset the approximation.
inline BfgsResult bfgs_minimize(const std::function<double(const RealVector&)>& f,
                                const std::function<RealVector(const RealVector&)>& grad,
                                RealVector x0, const QnConfig& config) {
    const Index n = x0.size();
    RealMatrix h_inv = RealMatrix::Identity(n, n);
    RealVector x = std::move(x0);
    double fx = f(x);
    RealVector g = grad(x);

    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    };

    BfgsResult result;
    RunTrace& trace = result.trace;
    trace.objective.push_back(fx);
    trace.grad_norm.push_back(g.norm());
    trace.seconds.push_back(elapsed());

    int curvature_failures = 0;
    bool force_steepest = false;

    while (true) {
        if (auto stop = converged(trace, config.tol)) {
            trace.reason = *stop;
            break;
        }
        RealVector d = force_steepest ? RealVector(-g) : RealVector(-(h_inv * g));
        if (d.dot(g) >= 0.0) {  // not a descent direction; fall back
            d = -g;
            h_inv = RealMatrix::Identity(n, n);
        }
        LineSearchResult ls;
        try {
            ls = linmin([&](double t) { return f(x + t * d); }, 0.0, config.initial_step);
        } catch (const DivergingLineError&) {
            trace.reason = StopReason::diverged;
            break;
        }
        const RealVector step = ls.t_min * d;
        const RealVector x_new = x + step;
        const double f_new = ls.f_min;
        const RealVector g_new = grad(x_new);
        const RealVector y = g_new - g;
        const double ys = y.dot(step);

        if (ys > 1e-12 * y.norm() * step.norm() && step.norm() > 0) {
            const double rho = 1.0 / ys;
            const RealMatrix outer = step * y.transpose();
            h_inv = (RealMatrix::Identity(n, n) - rho * outer) * h_inv *
                        (RealMatrix::Identity(n, n) - rho * outer.transpose()) +
                    rho * (step * step.transpose());
            curvature_failures = 0;
            force_steepest = false;
        } else {
            ++curvature_failures;
            force_steepest = true;
            if (curvature_failures >= config.curvature_fail_reset) {
                h_inv = RealMatrix::Identity(n, n);
                curvature_failures = 0;
            }
        }

        x = x_new;
        fx = f_new;
        g = g_new;
        trace.objective.push_back(fx);
        trace.grad_norm.push_back(g.norm());
        trace.seconds.push_back(elapsed());
    }

    result.x = std::move(x);
    result.value = fx;
    return result;
}

/// Random starting angles, uniform over the canonical ranges.
inline RealVector random_angles(Index k, Index r, Rng& rng) {
    const Index np = EulerHurwitzAngles::pair_count(k, r);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    RealVector v(2 * np + r);
    for (Index i = 0; i < np; ++i) v[i] = 0.5 * std::numbers::pi * u01(rng);
    for (Index i = 0; i < np; ++i) v[np + i] = std::numbers::pi * (2.0 * u01(rng) - 1.0);
    for (Index i = 0; i < r; ++i) v[2 * np + i] = std::numbers::pi * (2.0 * u01(rng) - 1.0);
    return v;
}

/// Objective gradient chained through the reconstruction Jacobian:
/// dh/ds_m = sum_il [ dh/dRe U_il Re(J_m)_il + dh/dIm U_il Im(J_m)_il ].
inline RealVector chained_angle_gradient(const DensityMatrix& rho, const Measure& m,
                                         const RealVector& flat_angles, Index k, Index r) {
    const EulerHurwitzAngles angles = EulerHurwitzAngles::unflatten(flat_angles, k, r);
    const StiefelPoint u = reconstruct(angles, k, r);
    const ObjectiveGradient eg = objective_gradient(rho, u, m);
    const std::vector<Matrix> jac = reconstruct_jacobian(angles, k, r);
    RealVector g(flat_angles.size());
    for (std::size_t a = 0; a < jac.size(); ++a)
        g[static_cast<Index>(a)] =
            (eg.d_re.array() * jac[a].real().array()).sum() +
            (eg.d_im.array() * jac[a].imag().array()).sum();
    return g;
}

/// Quasi-Newton minimization of h(F(s)) over unconstrained angle space.
inline MinimizeResult qn_minimize(const DensityMatrix& rho, const Measure& m, Index k,
                                  const QnConfig& config, Rng& rng,
                                  std::optional<RealVector> angles0 = std::nullopt) {
    const Index r = rho.rank();
    if (k < r) throw InvalidInputError("qn_minimize: cardinality below rank");
    RealVector x0 = angles0 ? std::move(*angles0) : random_angles(k, r, rng);

    auto f = [&](const RealVector& s) {
        return objective_h(rho, reconstruct(EulerHurwitzAngles::unflatten(s, k, r), k, r), m);
    };
    auto grad = [&](const RealVector& s) { return chained_angle_gradient(rho, m, s, k, r); };

    BfgsResult bfgs = bfgs_minimize(f, grad, std::move(x0), config);
    MinimizeResult out;
    out.value = bfgs.value;
    out.point = reconstruct(EulerHurwitzAngles::unflatten(bfgs.x, k, r), k, r);
    out.trace = std::move(bfgs.trace);
    return out;
}

// ---------------------------------------------------------------------------
// local unitary equivalence

enum class LuMetric { frobenius, trace };

struct LuConfig {
    QnConfig qn;
    LuMetric metric = LuMetric::frobenius;
    int restarts = 10;
    std::uint64_t seed = 1;
    double spectrum_tol = 1e-8;
};

struct LuResult {
    double distance = 0.0;
    bool spectra_mismatch = false;          // short-circuited, distance is the spectral bound
    std::vector<EulerHurwitzAngles> unitaries;  // one per local factor
    RunTrace trace;                          // best restart
};

namespace detail {

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline Matrix kron_all(const std::vector<Matrix>& ms) {
    Matrix out = ms.front();
    for (std::size_t i = 1; i < ms.size(); ++i) out = kron(out, ms[i]);
    return out;
}

/// Hermitian spectral sign function; subgradient choice sgn(0) = 0.
inline Matrix matrix_sign(const Matrix& h) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    RealVector s(es.eigenvalues().size());
    for (Index i = 0; i < s.size(); ++i)
        s[i] = es.eigenvalues()[i] > 0 ? 1.0 : (es.eigenvalues()[i] < 0 ? -1.0 : 0.0);
    return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

/// Minimal distance between rho2 and the local-unitary orbit of rho1,
/// minimizing over the Euler-Hurwitz angles of all local factors
/// simultaneously. States with different spectra short-circuit to the
/// exact spectral lower bound (unitarily invariant).
inline LuResult lu_equivalence_distance(const DensityMatrix& rho1, const DensityMatrix& rho2,
                                        const std::vector<Index>& local_dims,
                                        const LuConfig& config = {}) {
    Index total = 1;
    for (Index d : local_dims) total *= d;
    if (total != rho1.dim() || rho1.dim() != rho2.dim())
        throw InvalidInputError("lu_equivalence_distance: dimensions do not factorize as given");

    LuResult result;
    {
        const RealVector l1 = rho1.eigenvalues(), l2 = rho2.eigenvalues();
        const RealVector diff = l1 - l2;
        if (diff.cwiseAbs().maxCoeff() > config.spectrum_tol) {
            result.spectra_mismatch = true;
            result.distance = config.metric == LuMetric::frobenius
                                  ? diff.norm()
                                  : 0.5 * diff.cwiseAbs().sum();
            for (Index d : local_dims) {
                EulerHurwitzAngles id{d, d,
                                      RealVector::Zero(EulerHurwitzAngles::pair_count(d, d)),
                                      RealVector::Zero(EulerHurwitzAngles::pair_count(d, d)),
                                      RealVector::Zero(d)};
                result.unitaries.push_back(std::move(id));
            }
            return result;
        }
    }

    const int n_factors = static_cast<int>(local_dims.size());
    std::vector<Index> offsets(n_factors + 1, 0);
    for (int i = 0; i < n_factors; ++i)
        offsets[i + 1] = offsets[i] + 2 * EulerHurwitzAngles::pair_count(local_dims[i],
                                                                         local_dims[i]) +
                         local_dims[i];
    const Index n_params = offsets[n_factors];

    auto factors_of = [&](const RealVector& s) {
        std::vector<Matrix> us(n_factors);
        for (int i = 0; i < n_factors; ++i) {
            const Index d = local_dims[i];
            const RealVector seg = s.segment(offsets[i], offsets[i + 1] - offsets[i]);
            us[i] = reconstruct(EulerHurwitzAngles::unflatten(seg, d, d), d, d).u;
        }
        return us;
    };

    auto objective = [&](const RealVector& s) {
        const Matrix a = detail::kron_all(factors_of(s));
        const Matrix delta = a * rho1.matrix() * a.adjoint() - rho2.matrix();
        if (config.metric == LuMetric::frobenius) return delta.squaredNorm();
        Eigen::SelfAdjointEigenSolver<Matrix> es(delta);
        return 0.5 * es.eigenvalues().cwiseAbs().sum();
    };

    auto gradient = [&](const RealVector& s) {
        const std::vector<Matrix> us = factors_of(s);
        const Matrix a = detail::kron_all(us);
        const Matrix delta = a * rho1.matrix() * a.adjoint() - rho2.matrix();
        // d f = c * Re tr(dA * M): Frobenius^2 has c=4, M = rho1 A^dag Delta;
        // trace metric has c=1, M = rho1 A^dag sgn(Delta)/1 (subgradient).
        Matrix mmat;
        double c;
        if (config.metric == LuMetric::frobenius) {
            mmat = rho1.matrix() * a.adjoint() * delta;
            c = 4.0;
        } else {
            mmat = rho1.matrix() * a.adjoint() * detail::matrix_sign(delta);
            c = 1.0;
        }
        RealVector g(n_params);
        for (int i = 0; i < n_factors; ++i) {
            const Index d = local_dims[i];
            const RealVector seg = s.segment(offsets[i], offsets[i + 1] - offsets[i]);
            const EulerHurwitzAngles ang = EulerHurwitzAngles::unflatten(seg, d, d);
            const std::vector<Matrix> jac = reconstruct_jacobian(ang, d, d);
            for (std::size_t aidx = 0; aidx < jac.size(); ++aidx) {
                std::vector<Matrix> parts = us;
                parts[i] = jac[aidx];
                const Matrix da = detail::kron_all(parts);
                g[offsets[i] + static_cast<Index>(aidx)] =
                    c * (da.transpose().cwiseProduct(mmat)).sum().real();
            }
        }
        return g;
    };

    double best = std::numeric_limits<double>::infinity();
    RealVector best_x;
    RunTrace best_trace;
    for (int restart = 0; restart < config.restarts; ++restart) {
        Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(restart)));
        RealVector x0(n_params);
        if (restart == 0) {
            x0.setZero();  // identity factors
        } else {
            for (int i = 0; i < n_factors; ++i)
                x0.segment(offsets[i], offsets[i + 1] - offsets[i]) =
                    random_angles(local_dims[i], local_dims[i], rng);
        }
        BfgsResult run = bfgs_minimize(objective, gradient, std::move(x0), config.qn);
        if (run.value < best) {
            best = run.value;
            best_x = run.x;
            best_trace = std::move(run.trace);
        }
    }

    result.distance = config.metric == LuMetric::frobenius ? std::sqrt(std::max(0.0, best)) : best;
    for (int i = 0; i < n_factors; ++i) {
        const Index d = local_dims[i];
        const RealVector seg = best_x.segment(offsets[i], offsets[i + 1] - offsets[i]);
        // canonicalize for reporting
        const StiefelPoint u = reconstruct(EulerHurwitzAngles::unflatten(seg, d, d), d, d);
        result.unitaries.push_back(decompose(u));
    }
    result.trace = std::move(best_trace);
    return result;
}

}  // namespace convexroof
