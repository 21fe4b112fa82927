#pragma once

#include <utility>
#include <vector>

#include "convexroof/density.hpp"
#include "convexroof/measures.hpp"
#include "convexroof/optim.hpp"
#include "convexroof/types.hpp"

namespace convexroof {

namespace detail {
// Members with probability below this threshold are discarded: their
// normalized state is never formed (that division is singular) and both
// their measure and gradient contributions are zero.
inline constexpr double zero_probability_threshold = 1e-14;
}  // namespace detail

/// Point of the complex Stiefel manifold St(k, r): a k x r matrix with
/// orthonormal columns.
struct StiefelPoint {
    Index k = 0;
    Index r = 0;
    Matrix u;

    static StiefelPoint checked(Matrix m, double tol = 1e-10) {
        StiefelPoint p{m.rows(), m.cols(), std::move(m)};
        if (p.r > p.k) throw InvalidInputError("StiefelPoint: need k >= r");
        if (p.orthonormality_defect() > tol)
            throw InvalidInputError("StiefelPoint: columns are not orthonormal");
        return p;
    }

    double orthonormality_defect() const {
        return (u.adjoint() * u - Matrix::Identity(r, r)).norm();
    }
};

struct EnsembleMember {
    double p = 0.0;
    Vector psi;       // empty when discarded
    bool discarded = false;
};

/// Pure-state decomposition rho = sum_i p_i |psi_i><psi_i| of cardinality k.
struct PureEnsemble {
    std::vector<EnsembleMember> members;

    Index cardinality() const { return static_cast<Index>(members.size()); }

    Matrix reconstruct(Index dim) const {
        Matrix m = Matrix::Zero(dim, dim);
        for (const auto& mem : members)
            if (!mem.discarded) m += mem.p * (mem.psi * mem.psi.adjoint());
        return m;
    }
};

/// Gradient of the ensemble objective with respect to the real and
/// imaginary parts of the Stiefel matrix U.
struct ObjectiveGradient {
    RealMatrix d_re;
    RealMatrix d_im;
};

/// Default decomposition cardinality k = rank(rho) + 4, which is accurate
/// in practice while keeping the search space small.
inline Index default_cardinality(const DensityMatrix& rho) { return rho.rank() + 4; }

/// Outcome of one optimizer run: best objective value, the Stiefel point
/// that realizes it, and the iteration trace.
struct MinimizeResult {
    double value = 0.0;
    StiefelPoint point;
    RunTrace trace;
};

namespace detail {

inline void check_ensemble_shapes(const DensityMatrix& rho, const StiefelPoint& u) {
    if (u.r != rho.rank())
        throw InvalidInputError("ensemble: Stiefel rank " + std::to_string(u.r) +
                                " does not match density-matrix rank " +
                                std::to_string(rho.rank()));
    if (u.k < u.r) throw InvalidInputError("ensemble: cardinality below rank");
}

/// Unnormalized member states as columns: Psi~ = C sqrt(Lambda) U^T with
/// C the support eigenvectors of rho.
inline Matrix auxiliary_states(const DensityMatrix& rho, const Matrix& u) {
    const RealVector sqrt_lam = rho.support_values().cwiseSqrt();
    return rho.support_vectors() * sqrt_lam.asDiagonal() * u.transpose();
}

}  // namespace detail

/// Schroedinger-HJW construction: every U in St(k, r) yields a cardinality-k
/// pure-state decomposition of rho via |psi~_i> = sum_j U_ij sqrt(lambda_j) |chi_j>.
inline PureEnsemble ensemble_from_stiefel(const DensityMatrix& rho, const StiefelPoint& u) {
    detail::check_ensemble_shapes(rho, u);
    const Matrix aux = detail::auxiliary_states(rho, u.u);
    PureEnsemble ens;
    ens.members.resize(u.k);
    for (Index i = 0; i < u.k; ++i) {
        const double p = aux.col(i).squaredNorm();
        auto& mem = ens.members[i];
        mem.p = p;
        if (p < detail::zero_probability_threshold) {
            mem.discarded = true;
        } else {
            mem.psi = aux.col(i) / std::sqrt(p);
        }
    }
    return ens;
}

/// Ensemble objective h(U) = sum_i p_i(U) m(|psi_i(U)>), discarded members
/// contributing zero. Well-defined for any complex k x r matrix, which the
/// finite-difference oracles rely on.
inline double objective_h(const DensityMatrix& rho, const StiefelPoint& u, const Measure& m) {
    detail::check_ensemble_shapes(rho, u);
    const Matrix aux = detail::auxiliary_states(rho, u.u);
    double h = 0.0;
    for (Index i = 0; i < u.k; ++i) {
        const double p = aux.col(i).squaredNorm();
        if (p < detail::zero_probability_threshold) continue;
        h += p * m.value(aux.col(i) / std::sqrt(p));
    }
    return h;
}

/// Partial derivatives of h with respect to Re U_kl and Im U_kl:
///   dh/dRe U_kl = 2 lambda_l Re(U_kl) m(psi_k) + Re <mg_k, phi_R,kl>
///   dh/dIm U_kl = 2 lambda_l Im(U_kl) m(psi_k) + Re <mg_k, phi_I,kl>
/// with the auxiliary states
///   phi_R,kl = sqrt(p_k lambda_l) chi_l - lambda_l Re(U_kl) psi_k,
///   phi_I,kl = i sqrt(p_k lambda_l) chi_l - lambda_l Im(U_kl) psi_k,
/// and mg the complex-packed measure gradient at psi_k.
inline ObjectiveGradient objective_gradient(const DensityMatrix& rho, const StiefelPoint& u,
                                            const Measure& m) {
    detail::check_ensemble_shapes(rho, u);
    const Matrix chi = rho.support_vectors();
    const RealVector lam = rho.support_values();
    const RealVector sqrt_lam = lam.cwiseSqrt();
    const Matrix aux = detail::auxiliary_states(rho, u.u);

    ObjectiveGradient g{RealMatrix::Zero(u.k, u.r), RealMatrix::Zero(u.k, u.r)};
    for (Index i = 0; i < u.k; ++i) {
        const double p = aux.col(i).squaredNorm();
        if (p < detail::zero_probability_threshold) continue;  // zero contribution
        const Vector psi = aux.col(i) / std::sqrt(p);
        const double mval = m.value(psi);
        const MeasureGradient mgrad = m.gradient(psi);
        Vector mg(psi.size());
        for (Index c = 0; c < psi.size(); ++c) mg[c] = Complex(mgrad.d_re[c], mgrad.d_im[c]);
        const Vector overlaps = chi.adjoint() * mg;        // conj(<mg|chi_l>) entries
        const Complex state_term = mg.dot(psi);            // <mg|psi_k>
        const double sqrt_p = std::sqrt(p);
        for (Index l = 0; l < u.r; ++l) {
            const Complex v = std::conj(overlaps[l]);      // <mg, chi_l>
            const double re_u = u.u(i, l).real();
            const double im_u = u.u(i, l).imag();
            g.d_re(i, l) = 2.0 * lam[l] * re_u * mval + sqrt_p * sqrt_lam[l] * v.real() -
                           lam[l] * re_u * state_term.real();
            g.d_im(i, l) = 2.0 * lam[l] * im_u * mval - sqrt_p * sqrt_lam[l] * v.imag() -
                           lam[l] * im_u * state_term.real();
        }
    }
    return g;
}

}  // namespace convexroof
