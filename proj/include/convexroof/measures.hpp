#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "convexroof/density.hpp"
#include "convexroof/linalg.hpp"
#include "convexroof/types.hpp"

namespace convexroof {

/// Gradient of a pure-state measure with respect to the real and imaginary
/// components of the state, treated as free variables.
struct MeasureGradient {
    RealVector d_re;
    RealVector d_im;
};

/// A pure-state entanglement monotone: value plus analytic gradient.
/// The value function must be a smooth extension off the unit sphere
/// (the convex-roof gradient formulas take free partial derivatives).
struct Measure {
    std::string name;
    std::function<bool(Index)> applicable;  // dimension predicate
    std::function<double(const Vector&)> value;
    std::function<MeasureGradient(const Vector&)> gradient;
};

// ---------------------------------------------------------------------------
// entropy of entanglement

namespace detail {

inline double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

/// Central finite differences of a scalar function of the state components.
inline MeasureGradient finite_difference_gradient(const std::function<double(const Vector&)>& f,
                                                  const Vector& psi, double step) {
    const Index d = psi.size();
    MeasureGradient g{RealVector(d), RealVector(d)};
    Vector p = psi;
    for (Index i = 0; i < d; ++i) {
        const Complex orig = p[i];
        p[i] = orig + step;
        const double fpr = f(p);
        p[i] = orig - step;
        const double fmr = f(p);
        p[i] = orig + Complex(0, step);
        const double fpi = f(p);
        p[i] = orig - Complex(0, step);
        const double fmi = f(p);
        p[i] = orig;
        g.d_re[i] = (fpr - fmr) / (2 * step);
        g.d_im[i] = (fpi - fmi) / (2 * step);
    }
    return g;
}

}  // namespace detail

/// Von Neumann entropy (base 2) of the reduced state of the first factor
/// of a (dim_a x dim_b) bipartition.
inline double entropy_of_entanglement(const Vector& psi, Index dim_a, Index dim_b) {
    const Matrix rho_a = partial_trace_block(psi, dim_a, dim_b);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(rho_a);
    double s = 0.0;
    for (Index i = 0; i < solver.eigenvalues().size(); ++i)
        s -= detail::xlog2x(std::max(solver.eigenvalues()[i], 0.0));
    return s;
}

/// Analytic gradient of the entropy of entanglement via the eigenvalue
/// chain rule; falls back to central finite differences (step 1e-6) when
/// the reduced spectrum is degenerate within 1e-10, where the chain rule
/// is ill-conditioned.
inline MeasureGradient entropy_gradient(const Vector& psi, Index dim_a, Index dim_b) {
    const Matrix rho_a = partial_trace_block(psi, dim_a, dim_b);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(rho_a);
    const RealVector lam = solver.eigenvalues();
    bool degenerate = false;
    for (Index i = 0; i + 1 < lam.size(); ++i)
        if (std::abs(lam[i + 1] - lam[i]) < 1e-10) degenerate = true;
    if (degenerate) {
        return detail::finite_difference_gradient(
            [&](const Vector& p) { return entropy_of_entanglement(p, dim_a, dim_b); }, psi, 1e-6);
    }
    // dS = tr(W drho_a) with W = sum_i f'(lambda_i) v_i v_i^dag,
    // f(x) = -x log2 x; gradient components are 2 Re/Im of (W Psi) with
    // Psi the row-major (dim_a x dim_b) reshape of psi.
    const double inv_ln2 = 1.0 / std::log(2.0);
    RealVector fprime(lam.size());
    for (Index i = 0; i < lam.size(); ++i) {
        const double x = std::max(lam[i], 1e-300);
        fprime[i] = -(std::log2(x) + inv_ln2);
    }
    const Matrix w = solver.eigenvectors() * fprime.asDiagonal() * solver.eigenvectors().adjoint();
    Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        m(psi.data(), dim_a, dim_b);
    const Matrix wm = w * m;
    MeasureGradient g{RealVector(psi.size()), RealVector(psi.size())};
    for (Index a = 0; a < dim_a; ++a)
        for (Index b = 0; b < dim_b; ++b) {
            g.d_re[a * dim_b + b] = 2.0 * wm(a, b).real();
            g.d_im[a * dim_b + b] = 2.0 * wm(a, b).imag();
        }
    return g;
}

// ---------------------------------------------------------------------------
// three-qubit tangle

namespace detail {

// Index quadruples of the tangle polynomial g = d1 - 2 d2 + 4 d3 in the
// standard product basis (1-based components as usually written; stored
// 0-based). d1 terms are squared pairs, d2 terms products of two pairs,
// d3 the two odd quadruples.
inline constexpr std::array<std::array<int, 2>, 4> tangle_pairs{
    {{0, 7}, {1, 6}, {2, 5}, {4, 3}}};
inline constexpr std::array<std::array<int, 4>, 2> tangle_quads{
    {{0, 6, 5, 3}, {7, 1, 2, 4}}};

/// g and its holomorphic component derivatives dg/dpsi_i.
inline Complex tangle_poly(const Vector& psi, Vector* deriv = nullptr) {
    if (deriv) deriv->setZero(8);
    Complex g = 0.0;
    for (const auto& [a, b] : tangle_pairs) {
        g += psi[a] * psi[a] * psi[b] * psi[b];
        if (deriv) {
            (*deriv)[a] += 2.0 * psi[a] * psi[b] * psi[b];
            (*deriv)[b] += 2.0 * psi[a] * psi[a] * psi[b];
        }
    }
    for (std::size_t p = 0; p < tangle_pairs.size(); ++p)
        for (std::size_t q = p + 1; q < tangle_pairs.size(); ++q) {
            const int a = tangle_pairs[p][0], b = tangle_pairs[p][1];
            const int c = tangle_pairs[q][0], d = tangle_pairs[q][1];
            g -= 2.0 * psi[a] * psi[b] * psi[c] * psi[d];
            if (deriv) {
                (*deriv)[a] -= 2.0 * psi[b] * psi[c] * psi[d];
                (*deriv)[b] -= 2.0 * psi[a] * psi[c] * psi[d];
                (*deriv)[c] -= 2.0 * psi[a] * psi[b] * psi[d];
                (*deriv)[d] -= 2.0 * psi[a] * psi[b] * psi[c];
            }
        }
    for (const auto& [a, b, c, d] : tangle_quads) {
        g += 4.0 * psi[a] * psi[b] * psi[c] * psi[d];
        if (deriv) {
            (*deriv)[a] += 4.0 * psi[b] * psi[c] * psi[d];
            (*deriv)[b] += 4.0 * psi[a] * psi[c] * psi[d];
            (*deriv)[c] += 4.0 * psi[a] * psi[b] * psi[d];
            (*deriv)[d] += 4.0 * psi[a] * psi[b] * psi[c];
        }
    }
    return g;
}

}  // namespace detail

/// Three-qubit tangle tau_p = 4 |d1 - 2 d2 + 4 d3|.
inline double tangle(const Vector& psi) {
    if (psi.size() != 8) throw InvalidInputError("tangle: state must have dimension 8");
    return 4.0 * std::abs(detail::tangle_poly(psi));
}

/// Gradient of the tangle. The modulus is not differentiable at tau_p = 0;
/// there the zero vector (a subgradient) is returned, which keeps
/// optimizers stationary at the measure's floor.
inline MeasureGradient tangle_gradient(const Vector& psi) {
    if (psi.size() != 8) throw InvalidInputError("tangle_gradient: state must have dimension 8");
    Vector deriv;
    const Complex g = detail::tangle_poly(psi, &deriv);
    MeasureGradient out{RealVector::Zero(8), RealVector::Zero(8)};
    const double mod = std::abs(g);
    if (4.0 * mod < 1e-10) return out;
    const Complex gbar = std::conj(g) / mod;
    for (Index i = 0; i < 8; ++i) {
        const Complex z = gbar * deriv[i];
        out.d_re[i] = 4.0 * z.real();
        out.d_im[i] = -4.0 * z.imag();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Meyer-Wallach measure

/// gamma = 2 [1 - (1/N) sum_k tr(rho_k^2)], the single-qubit linear entropy
/// averaged over all qubits.
inline double meyer_wallach(const Vector& psi, int n_qubits) {
    if (psi.size() != (Index{1} << n_qubits))
        throw InvalidInputError("meyer_wallach: state dimension does not match qubit count");
    double purity_sum = 0.0;
    for (int k = 1; k <= n_qubits; ++k) {
        const Matrix rho = partial_trace_single(psi, k, n_qubits);
        purity_sum += (rho * rho).trace().real();
    }
    return 2.0 * (1.0 - purity_sum / n_qubits);
}

/// General-form gradient: -8/N sum_{k,mu} psi^{(i with mu at k)} rho_k^{nu_k, mu}.
inline MeasureGradient meyer_wallach_gradient(const Vector& psi, int n_qubits) {
    const Index dim = Index{1} << n_qubits;
    if (psi.size() != dim)
        throw InvalidInputError("meyer_wallach_gradient: state dimension does not match qubit count");
    std::vector<Matrix> rhos;
    rhos.reserve(n_qubits);
    for (int k = 1; k <= n_qubits; ++k) rhos.push_back(partial_trace_single(psi, k, n_qubits));
    MeasureGradient g{RealVector(dim), RealVector(dim)};
    const double pref = -8.0 / n_qubits;
    for (Index i = 0; i < dim; ++i) {
        Complex acc = 0.0;
        for (int k = 1; k <= n_qubits; ++k) {
            const Index shift = n_qubits - k;
            const Index nu_k = (i >> shift) & 1;
            const Index base = i & ~(Index{1} << shift);
            acc += psi[base] * rhos[k - 1](nu_k, 0);
            acc += psi[base | (Index{1} << shift)] * rhos[k - 1](nu_k, 1);
        }
        g.d_re[i] = pref * acc.real();
        g.d_im[i] = pref * acc.imag();
    }
    return g;
}

/// Symmetry-reduced Meyer-Wallach value 2 [1 - tr(rho_1^2)] and its
/// closed-form gradient, valid as a stand-in for the general form on
/// eigenstates of the ring rotation (all single-qubit reductions equal).
inline std::pair<double, MeasureGradient> meyer_wallach_symmetric_unchecked(const Vector& psi,
                                                                            int n_qubits) {
    const Index dim = Index{1} << n_qubits;
    if (psi.size() != dim)
        throw InvalidInputError("meyer_wallach_symmetric: state dimension does not match qubit count");
    const Index half = dim / 2;
    const Matrix rho = partial_trace_single(psi, 1, n_qubits);
    const double value = 2.0 * (1.0 - (rho * rho).trace().real());
    MeasureGradient g{RealVector(dim), RealVector(dim)};
    const double r00 = rho(0, 0).real();
    const double r11 = rho(1, 1).real();
    const Complex r01 = rho(0, 1);
    for (Index i = 0; i < half; ++i) {
        const Complex cross = r01 * psi[half + i];
        g.d_re[i] = -8.0 * (r00 * psi[i].real() + cross.real());
        g.d_im[i] = -8.0 * (r00 * psi[i].imag() + cross.imag());
    }
    for (Index i = half; i < dim; ++i) {
        const Complex cross = r01 * std::conj(psi[i - half]);
        g.d_re[i] = -8.0 * (r11 * psi[i].real() + cross.real());
        g.d_im[i] = -8.0 * (r11 * psi[i].imag() - cross.imag());
    }
    return {value, std::move(g)};
}

// ---------------------------------------------------------------------------
// two-qubit entanglement of formation (analytic oracle)

/// Wootters' closed form for the entanglement of formation of an arbitrary
/// two-qubit density matrix: concurrence from the square roots of the
/// eigenvalues of rho * rho_tilde, then the binary entropy.
inline double wootters_eof(const DensityMatrix& rho) {
    if (rho.dim() != 4) throw InvalidInputError("wootters_eof: only defined for two qubits");
    // sigma_y (x) sigma_y in the standard basis has anti-diagonal (-1, 1, 1, -1)
    Matrix yy = Matrix::Zero(4, 4);
    yy(0, 3) = -1.0;
    yy(1, 2) = 1.0;
    yy(2, 1) = 1.0;
    yy(3, 0) = -1.0;
    const Matrix rho_tilde = yy * rho.matrix().conjugate() * yy;
    // eigenvalues of rho*rho_tilde via the Hermitian product sqrt(rho) rho_tilde sqrt(rho)
    const Matrix sqrt_rho = rho.eigenvectors() *
                            rho.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                            rho.eigenvectors().adjoint();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sqrt_rho * rho_tilde * sqrt_rho);
    RealVector mu = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const double c = std::max(0.0, mu[3] - mu[2] - mu[1] - mu[0]);
    const double x = 0.5 * (1.0 + std::sqrt(std::max(0.0, 1.0 - c * c)));
    return -detail::xlog2x(x) - detail::xlog2x(1.0 - x);
}

// ---------------------------------------------------------------------------
// GHZ / W mixtures

inline Vector ghz_state(int n_qubits, int sign = +1) {
    const Index dim = Index{1} << n_qubits;
    Vector psi = Vector::Zero(dim);
    psi[0] = 1.0 / std::sqrt(2.0);
    psi[dim - 1] = sign >= 0 ? psi[0] : -psi[0];
    return psi;
}

inline Vector w_state() {
    Vector psi = Vector::Zero(8);
    // |up down down> + |down up down> + |down down up>, qubit 1 = MSB
    psi[3] = psi[5] = psi[6] = 1.0 / std::sqrt(3.0);
    return psi;
}

/// rho(eta) = eta |GHZ+><GHZ+| + (1 - eta) |W><W|; rank 2 for 0 < eta < 1.
inline DensityMatrix ghzw_mixture(double eta) {
    if (eta < 0.0 || eta > 1.0) throw InvalidInputError("ghzw_mixture: eta must be in [0, 1]");
    const Vector ghz = ghz_state(3), w = w_state();
    const Matrix m = eta * ghz * ghz.adjoint() + (1.0 - eta) * w * w.adjoint();
    return DensityMatrix::from_matrix(m);
}

/// Mixing threshold below which the tangle of ghzw_mixture vanishes:
/// eta_0 = 4 * 2^(1/3) / (3 + 4 * 2^(1/3)).
inline double ghzw_threshold() {
    const double c = 4.0 * std::cbrt(2.0);
    return c / (3.0 + c);
}

// ---------------------------------------------------------------------------
// measure bundle

inline Measure entropy_measure(Index dim_a, Index dim_b) {
    return Measure{
        "eof-entropy",
        [=](Index d) { return d == dim_a * dim_b; },
        [=](const Vector& psi) { return entropy_of_entanglement(psi, dim_a, dim_b); },
        [=](const Vector& psi) { return entropy_gradient(psi, dim_a, dim_b); },
    };
}

inline Measure tangle_measure() {
    return Measure{
        "tangle",
        [](Index d) { return d == 8; },
        [](const Vector& psi) { return tangle(psi); },
        [](const Vector& psi) { return tangle_gradient(psi); },
    };
}

inline Measure meyer_wallach_measure(int n_qubits) {
    return Measure{
        "meyer-wallach",
        [=](Index d) { return d == (Index{1} << n_qubits); },
        [=](const Vector& psi) { return meyer_wallach(psi, n_qubits); },
        [=](const Vector& psi) { return meyer_wallach_gradient(psi, n_qubits); },
    };
}

/// Symmetry-reduced Meyer-Wallach measure. Exact whenever every state it is
/// evaluated on lies in a single eigensector of the ring rotation (e.g. all
/// ensemble states of a density matrix whose support sits in one sector).
inline Measure meyer_wallach_symmetric_measure(int n_qubits) {
    return Measure{
        "meyer-wallach-symmetric",
        [=](Index d) { return d == (Index{1} << n_qubits); },
        [=](const Vector& psi) { return meyer_wallach_symmetric_unchecked(psi, n_qubits).first; },
        [=](const Vector& psi) { return meyer_wallach_symmetric_unchecked(psi, n_qubits).second; },
    };
}

/// Constant measure; useful for gradient tests (all contributions must cancel).
inline Measure constant_measure(double c) {
    return Measure{
        "constant",
        [](Index) { return true; },
        [=](const Vector&) { return c; },
        [](const Vector& psi) {
            return MeasureGradient{RealVector::Zero(psi.size()), RealVector::Zero(psi.size())};
        },
    };
}

/// Resolve a measure by its CLI name for a given Hilbert-space dimension.
inline Measure measure_by_name(const std::string& name, Index dim) {
    if (name == "eof-entropy") {
        if (dim != 4)
            throw InvalidInputError("eof-entropy requires a two-qubit (dim 4) state");
        return entropy_measure(2, 2);
    }
    if (name == "tangle") {
        if (dim != 8) throw InvalidInputError("tangle requires a three-qubit (dim 8) state");
        return tangle_measure();
    }
    if (name == "meyer-wallach") return meyer_wallach_measure(qubit_count(dim));
    if (name == "meyer-wallach-symmetric")
        return meyer_wallach_symmetric_measure(qubit_count(dim));
    throw InvalidInputError("unknown measure '" + name + "'");
}

}  // namespace convexroof
