#pragma once

#include <utility>

#include "convexroof/types.hpp"

namespace convexroof {

struct EigResult {
    RealVector eigenvalues;  // descending
    Matrix eigenvectors;     // columns, same order
};

inline double hermiticity_defect(const Matrix& m) {
    return (m - m.adjoint()).norm();
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.
inline EigResult eig_hermitian(const Matrix& m, double herm_tol = 1e-10) {
    if (m.rows() != m.cols())
        throw InvalidInputError("eig_hermitian: matrix is not square");
    if (hermiticity_defect(m) > herm_tol)
        throw InvalidInputError("eig_hermitian: matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eig_hermitian: eigensolver failed to converge");
    const Index n = m.rows();
    EigResult out;
    out.eigenvalues = solver.eigenvalues().reverse();
    out.eigenvectors = solver.eigenvectors().rowwise().reverse();
    (void)n;
    return out;
}

/// Spectral factors of exp(t x) for skew-Hermitian x: with i*x = W diag(theta) W^dag,
/// exp(t x) = W diag(e^{-i t theta}) W^dag. Factoring once makes the geodesic
/// line search cheap in t.
struct SkewExpFactors {
    Matrix w;
    RealVector theta;

    Matrix at(double t) const {
        Vector phases(theta.size());
        for (Index i = 0; i < theta.size(); ++i)
            phases[i] = std::exp(Complex(0.0, -t * theta[i]));
        return w * phases.asDiagonal() * w.adjoint();
    }
};

inline double skewness_defect(const Matrix& x) {
    return (x + x.adjoint()).norm();
}

inline SkewExpFactors factor_skew(const Matrix& x, double skew_tol = 1e-10) {
    if (x.rows() != x.cols())
        throw InvalidInputError("expm_skew: matrix is not square");
    if (skewness_defect(x) > skew_tol)
        throw InvalidInputError("expm_skew: matrix is not skew-Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(Complex(0.0, 1.0) * x);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("expm_skew: eigensolver failed to converge");
    return {solver.eigenvectors(), solver.eigenvalues()};
}

/// Matrix exponential of a skew-Hermitian matrix; exactly unitary up to
/// the accuracy of the Hermitian eigendecomposition.
inline Matrix expm_skew(const Matrix& x) { return factor_skew(x).at(1.0); }

/// Reduced 2x2 density matrix of qubit `keep` (1-based, qubit 1 = most
/// significant bit) of an n-qubit pure state.
inline Matrix partial_trace_single(const Vector& psi, int keep, int n_qubits) {
    const Index dim = Index{1} << n_qubits;
    if (psi.size() != dim)
        throw InvalidInputError("partial_trace_single: state dimension does not match qubit count");
    if (keep < 1 || keep > n_qubits)
        throw InvalidInputError("partial_trace_single: qubit index out of range");
    const Index mask = Index{1} << (n_qubits - keep);
    Matrix rho = Matrix::Zero(2, 2);
    for (Index i = 0; i < dim; ++i) {
        if (i & mask) continue;
        const Index i1 = i | mask;
        rho(0, 0) += psi[i] * std::conj(psi[i]);
        rho(1, 1) += psi[i1] * std::conj(psi[i1]);
        rho(0, 1) += psi[i] * std::conj(psi[i1]);
    }
    rho(1, 0) = std::conj(rho(0, 1));
    return rho;
}

/// Reduced density matrix of the first factor of a (dim_a x dim_b) bipartition.
inline Matrix partial_trace_block(const Vector& psi, Index dim_a, Index dim_b) {
    if (dim_a < 1 || dim_b < 1 || psi.size() != dim_a * dim_b)
        throw InvalidInputError("partial_trace_block: bipartition does not match state dimension");
    // row-major reshape: component (a, b) sits at index a*dim_b + b
    Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        m(psi.data(), dim_a, dim_b);
    return m * m.adjoint();
}

inline Matrix random_gaussian_matrix(Index rows, Index cols, Rng& rng) {
    std::normal_distribution<double> g;
    Matrix out(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j)
            out(i, j) = Complex(g(rng), g(rng));
    return out;
}

/// Haar-like random element of St(k, r): thin QR of a complex Gaussian
/// matrix, phase-fixed so the diagonal of R is real positive.
inline Matrix random_stiefel(Index k, Index r, Rng& rng) {
    if (r > k) throw InvalidInputError("random_stiefel: need r <= k");
    const Matrix g = random_gaussian_matrix(k, r, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(k, r);
    const Matrix rm = q.adjoint() * g;
    for (Index j = 0; j < r; ++j) {
        const Complex d = rm(j, j);
        const double a = std::abs(d);
        if (a > 0) q.col(j) *= d / a;
    }
    return q;
}

inline Matrix random_unitary(Index k, Rng& rng) { return random_stiefel(k, k, rng); }

inline Vector random_pure_state(Index dim, Rng& rng) {
    Vector psi = random_gaussian_matrix(dim, 1, rng).col(0);
    psi.normalize();
    return psi;
}

}  // namespace convexroof
