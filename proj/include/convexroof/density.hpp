#pragma once

#include <string>
#include <utility>

#include "convexroof/linalg.hpp"
#include "convexroof/types.hpp"

namespace convexroof {

namespace detail {
// Relative rank threshold: eigenvalues below rank_eps * lambda_max do not
// count towards the rank. Canonical thermal matrices at low temperature
// are numerically rank-deficient, so this cannot be an absolute cutoff.
inline constexpr double rank_eps = 1e-12;
inline constexpr double negativity_tol = 1e-12;
inline constexpr double trace_tol = 1e-12;
inline constexpr double herm_tol = 1e-10;
}  // namespace detail

/// Hermitian, positive semi-definite, unit-trace matrix together with its
/// eigendecomposition (descending eigenvalues) and numerical rank.
class DensityMatrix {
  public:
    /// Validates Hermiticity, trace and positivity, then diagonalizes.
    /// Eigenvalues in [-negativity_tol, 0) are clamped to zero.
    static DensityMatrix from_matrix(const Matrix& m) {
        if (m.rows() != m.cols())
            throw InvalidInputError("DensityMatrix: matrix is not square");
        if (hermiticity_defect(m) > detail::herm_tol)
            throw InvalidInputError("DensityMatrix: matrix is not Hermitian (defect " +
                                    std::to_string(hermiticity_defect(m)) + ")");
        if (std::abs(m.trace().real() - 1.0) > detail::trace_tol ||
            std::abs(m.trace().imag()) > detail::trace_tol)
            throw InvalidInputError("DensityMatrix: trace is not 1 (got " +
                                    std::to_string(m.trace().real()) + ")");
        EigResult eig = eig_hermitian(m, detail::herm_tol);
        for (Index i = 0; i < eig.eigenvalues.size(); ++i) {
            if (eig.eigenvalues[i] < -detail::negativity_tol)
                throw InvalidInputError("DensityMatrix: negative eigenvalue " +
                                        std::to_string(eig.eigenvalues[i]));
            if (eig.eigenvalues[i] < 0) eig.eigenvalues[i] = 0.0;
        }
        return DensityMatrix(m, std::move(eig.eigenvalues), std::move(eig.eigenvectors));
    }

    /// Trusted constructor for matrices assembled directly from a known
    /// eigenbasis (e.g. thermal states); skips the re-diagonalization.
    /// `vals` must be non-negative, descending, summing to 1; `vecs` columns
    /// orthonormal.
    static DensityMatrix from_eigenpairs(RealVector vals, Matrix vecs) {
        if (vals.size() != vecs.cols())
            throw InvalidInputError("DensityMatrix: eigenvalue/eigenvector count mismatch");
        Matrix m = vecs * vals.asDiagonal() * vecs.adjoint();
        return DensityMatrix(std::move(m), std::move(vals), std::move(vecs));
    }

    /// Projector onto a normalized pure state.
    static DensityMatrix pure(const Vector& psi) {
        if (std::abs(psi.norm() - 1.0) > 1e-12)
            throw InvalidInputError("DensityMatrix::pure: state is not normalized");
        RealVector vals = RealVector::Zero(psi.size());
        vals[0] = 1.0;
        // complete an orthonormal basis around psi
        Eigen::HouseholderQR<Matrix> qr(psi);
        Matrix vecs = qr.householderQ();
        const Complex overlap = vecs.col(0).dot(psi);  // conj(v0) . psi
        vecs.col(0) *= overlap;                        // align first column with psi exactly
        return DensityMatrix(psi * psi.adjoint(), std::move(vals), std::move(vecs));
    }

    Index dim() const { return matrix_.rows(); }
    Index rank() const { return rank_; }
    const Matrix& matrix() const { return matrix_; }
    const RealVector& eigenvalues() const { return eigenvalues_; }
    const Matrix& eigenvectors() const { return eigenvectors_; }

    /// Eigenvalues above the rank threshold.
    RealVector support_values() const { return eigenvalues_.head(rank_); }
    /// Eigenvectors spanning the support, as columns.
    Matrix support_vectors() const { return eigenvectors_.leftCols(rank_); }

  private:
    DensityMatrix(Matrix m, RealVector vals, Matrix vecs)
        : matrix_(std::move(m)), eigenvalues_(std::move(vals)), eigenvectors_(std::move(vecs)) {
        const double lmax = eigenvalues_.size() ? eigenvalues_[0] : 0.0;
        rank_ = 0;
        for (Index i = 0; i < eigenvalues_.size(); ++i)
            if (eigenvalues_[i] > detail::rank_eps * lmax) ++rank_;
    }

    Matrix matrix_;
    RealVector eigenvalues_;
    Matrix eigenvectors_;
    Index rank_ = 0;
};

/// Random density matrix of exact rank `rank`: G G^dag / tr(G G^dag) with G
/// a dim x rank standard complex Gaussian matrix. Deterministic per seed.
inline DensityMatrix random_density(Index dim, Index rank, std::uint64_t seed) {
    if (rank < 1 || rank > dim)
        throw InvalidInputError("random_density: need 1 <= rank <= dim");
    Rng rng(seed);
    const Matrix g = random_gaussian_matrix(dim, rank, rng);
    Matrix m = g * g.adjoint();
    m /= m.trace().real();
    m = Complex(0.5, 0.0) * (m + Matrix(m.adjoint()));  // scrub rounding asymmetry
    return DensityMatrix::from_matrix(m);
}

}  // namespace convexroof
