#pragma once

#include <bit>
#include <chrono>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "convexroof/convex_roof.hpp"
#include "convexroof/density.hpp"
#include "convexroof/measures.hpp"

namespace convexroof {

/// Ferromagnetic ring of N spin-1/2 sites with radial in-plane fields:
///   H = -J sum_i S_i . S_{i+1} + b sum_i (S_i^x cos a_i + S_i^y sin a_i),
/// a_k = 2 pi (k-1)/N, S_{N+1} = S_1, S = sigma/2. The ring sum counts the
/// single N=2 bond twice, exactly as the formula reads.
struct RingModel {
    int n_spins = 3;
    double j = 1.0;  // exchange coupling, > 0 (ferromagnetic)
    double b = 0.0;  // field strength, same units as j

    double alpha(int site) const {  // 1-based site index
        return 2.0 * std::numbers::pi * (site - 1) / n_spins;
    }
    Index dim() const { return Index{1} << n_spins; }
};

namespace detail {
inline constexpr int max_ring_spins = 14;

inline void check_ring(const RingModel& model) {
    if (model.n_spins < 2) throw InvalidInputError("spin ring: need at least 2 spins");
    if (model.n_spins > max_ring_spins)
        throw CapacityError("spin ring: N = " + std::to_string(model.n_spins) +
                            " exceeds the dense-matrix budget (N <= 14)");
    if (model.j <= 0) throw InvalidInputError("spin ring: coupling must be ferromagnetic (J > 0)");
}
}  // namespace detail

/// Dense 2^N x 2^N ring Hamiltonian. Qubit 1 is the most significant bit.
inline Matrix build_hamiltonian(const RingModel& model) {
    detail::check_ring(model);
    const int n = model.n_spins;
    const Index dim = model.dim();
    Matrix h = Matrix::Zero(dim, dim);
    for (Index idx = 0; idx < dim; ++idx) {
        for (int i = 1; i <= n; ++i) {
            const int jsite = i % n + 1;
            const Index mi = Index{1} << (n - i);
            const Index mj = Index{1} << (n - jsite);
            const double si = (idx & mi) ? -1.0 : 1.0;
            const double sj = (idx & mj) ? -1.0 : 1.0;
            h(idx, idx) += -model.j * 0.25 * si * sj;  // Sz Sz
            if (si * sj < 0)                           // flip-flop on anti-aligned bits
                h(idx ^ mi ^ mj, idx) += -model.j * 0.5;
        }
        for (int i = 1; i <= n; ++i) {
            const Index mi = Index{1} << (n - i);
            const double a = model.alpha(i);
            // <1|(cos a Sx + sin a Sy)|0> = e^{ia}/2 and its conjugate
            const Complex amp = (idx & mi) ? 0.5 * std::exp(Complex(0, -a))
                                           : 0.5 * std::exp(Complex(0, a));
            h(idx ^ mi, idx) += model.b * amp;
        }
    }
    return h;
}

/// Action of the 2 pi / N ring rotation: cyclic shift of the qubit labels
/// combined with the site z-rotations that carry the field pattern along,
/// R |idx> = e^{i Delta popcount(idx)} |rotate(idx)>. Chosen so R^N = 1.
struct RotationAction {
    int n_qubits = 0;
    std::vector<Index> target;   // rotated basis index
    std::vector<Complex> phase;

    Vector apply(const Vector& psi) const {
        Vector out(psi.size());
        for (Index i = 0; i < psi.size(); ++i) out[target[i]] = phase[i] * psi[i];
        return out;
    }
};

inline RotationAction rotation_action(int n_qubits) {
    if (n_qubits < 2) throw InvalidInputError("rotation_action: need at least 2 qubits");
    const Index dim = Index{1} << n_qubits;
    const double delta = 2.0 * std::numbers::pi / n_qubits;
    RotationAction act;
    act.n_qubits = n_qubits;
    act.target.resize(dim);
    act.phase.resize(dim);
    for (Index i = 0; i < dim; ++i) {
        act.target[i] = (i >> 1) | ((i & 1) << (n_qubits - 1));
        const int down = std::popcount(static_cast<std::uint64_t>(i));
        act.phase[i] = std::exp(Complex(0.0, delta * down));
    }
    return act;
}

/// Rotation operator as a dense matrix; commutes with build_hamiltonian
/// output and satisfies R^N = identity.
inline Matrix rotation_operator(int n_qubits) {
    const RotationAction act = rotation_action(n_qubits);
    const Index dim = Index{1} << n_qubits;
    Matrix r = Matrix::Zero(dim, dim);
    for (Index i = 0; i < dim; ++i) r(act.target[i], i) = act.phase[i];
    return r;
}

/// Eigenbasis simultaneously diagonal in H and the ring rotation R:
/// energies ascending; degenerate H-eigenspaces further diagonalized with
/// respect to R, ties broken by ascending rotation phase.
struct SymmetricEigenbasis {
    RealVector energies;   // ascending
    Matrix vectors;        // columns
    Vector r_eigenvalues;  // unit-modulus phase factors per column
};

inline SymmetricEigenbasis symmetric_eigenbasis(const RingModel& model) {
    const Matrix h = build_hamiltonian(model);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    const RealVector energies = solver.eigenvalues();
    Matrix vectors = solver.eigenvectors();
    const Index dim = h.rows();
    const RotationAction rot = rotation_action(model.n_spins);

    const double scale = std::max(std::abs(energies[0]), std::abs(energies[dim - 1]));
    const double degeneracy_tol = 1e-10 * std::max(scale, 1.0);

    SymmetricEigenbasis out;
    out.energies = energies;
    out.r_eigenvalues = Vector(dim);

    Index start = 0;
    while (start < dim) {
        Index end = start + 1;
        while (end < dim && energies[end] - energies[end - 1] < degeneracy_tol) ++end;
        const Index blk = end - start;
        if (blk == 1) {
            const Vector v = vectors.col(start);
            out.r_eigenvalues[start] = v.dot(rot.apply(v));
        } else {
            Matrix sub = vectors.middleCols(start, blk);
            Matrix r_sub(dim, blk);
            for (Index c = 0; c < blk; ++c) r_sub.col(c) = rot.apply(sub.col(c));
            const Matrix r_block = sub.adjoint() * r_sub;  // unitary within the block
            Eigen::ComplexEigenSolver<Matrix> ces(r_block);
            // sort by ascending phase angle
            std::vector<Index> order(blk);
            for (Index c = 0; c < blk; ++c) order[c] = c;
            std::sort(order.begin(), order.end(), [&](Index a, Index b) {
                return std::arg(ces.eigenvalues()[a]) < std::arg(ces.eigenvalues()[b]);
            });
            Matrix w(blk, blk);
            Vector phases(blk);
            for (Index c = 0; c < blk; ++c) {
                w.col(c) = ces.eigenvectors().col(order[c]);
                phases[c] = ces.eigenvalues()[order[c]];
                phases[c] /= std::abs(phases[c]);
            }
            // re-orthonormalize groups sharing an R-eigenvalue
            Index g0 = 0;
            while (g0 < blk) {
                Index g1 = g0 + 1;
                while (g1 < blk && std::abs(phases[g1] - phases[g0]) < 1e-8) ++g1;
                if (g1 - g0 > 1) {
                    Eigen::HouseholderQR<Matrix> qr(w.middleCols(g0, g1 - g0));
                    w.middleCols(g0, g1 - g0) =
                        Matrix(qr.householderQ()).leftCols(g1 - g0);
                }
                g0 = g1;
            }
            vectors.middleCols(start, blk) = sub * w;
            out.r_eigenvalues.segment(start, blk) = phases;
        }
        start = end;
    }
    out.vectors = std::move(vectors);
    return out;
}

/// Symmetry-reduced Meyer-Wallach for states that are eigenstates of the
/// ring rotation; rejects other inputs.
inline std::pair<double, MeasureGradient> meyer_wallach_symmetric(const Vector& psi,
                                                                  int n_qubits) {
    const RotationAction rot = rotation_action(n_qubits);
    const Vector rpsi = rot.apply(psi);
    const Complex expect = psi.dot(rpsi);
    if ((rpsi - expect * psi).norm() > 1e-8)
        throw InvalidInputError(
            "meyer_wallach_symmetric: state is not a ring-rotation eigenstate");
    return meyer_wallach_symmetric_unchecked(psi, n_qubits);
}

/// Canonical thermal state exp(-H/T)/tr exp(-H/T) (k_B = 1), computed in
/// the symmetric eigenbasis with the ground-energy shift for stability.
struct ThermalState {
    RingModel model;
    double temperature = 0.0;
    DensityMatrix rho;
    Vector r_eigenvalues;  // rotation phases aligned with rho's eigenvectors
};

inline ThermalState thermal_state(const RingModel& model, double temperature) {
    if (temperature <= 0) throw InvalidInputError("thermal_state: temperature must be positive");
    const SymmetricEigenbasis basis = symmetric_eigenbasis(model);
    const Index dim = basis.energies.size();
    RealVector weights(dim);
    for (Index i = 0; i < dim; ++i)
        weights[i] = std::exp(-(basis.energies[i] - basis.energies[0]) / temperature);
    weights /= weights.sum();
    // energies ascending => weights descending, as DensityMatrix expects
    return ThermalState{model, temperature,
                        DensityMatrix::from_eigenpairs(weights, basis.vectors),
                        basis.r_eigenvalues};
}

/// Gap between the two lowest energies.
inline double ground_splitting(const RingModel& model) {
    if (model.b <= 0) throw InvalidInputError("ground_splitting: defined for b > 0");
    const Matrix h = build_hamiltonian(model);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    return solver.eigenvalues()[1] - solver.eigenvalues()[0];
}

/// True when every eigenvector in the numerical support shares one
/// rotation eigenvalue; then every HJW ensemble state stays inside that
/// rotation sector and the symmetry-reduced Meyer-Wallach form is exact.
inline bool support_in_single_sector(const ThermalState& state, double tol = 1e-8) {
    const Index r = state.rho.rank();
    for (Index i = 1; i < r; ++i)
        if (std::abs(state.r_eigenvalues[i] - state.r_eigenvalues[0]) > tol) return false;
    return true;
}

/// Convex-roof Meyer-Wallach of a thermal state, dispatching to the
/// symmetry-reduced measure when the support permits.
inline RoofResult thermal_meyer_wallach(const ThermalState& state, const RoofConfig& config) {
    const Measure m = support_in_single_sector(state)
                          ? meyer_wallach_symmetric_measure(state.model.n_spins)
                          : meyer_wallach_measure(state.model.n_spins);
    return convex_roof(state.rho, m, config);
}

// ---------------------------------------------------------------------------
// sweeps

struct SweepRow {
    int n_spins = 0;
    double temperature = 0.0;
    double b = 0.0;
    double gamma = std::numeric_limits<double>::quiet_NaN();
    double gamma_err_estimate = 0.0;
    std::string optimizer;
    int restarts = 0;
    double seconds = 0.0;
    bool failed = false;
};

struct SweepResult {
    std::vector<SweepRow> rows;

    /// Maximum gamma and its b for one (N, T) slice, in row order.
    std::pair<double, double> max_over_b(int n, double t) const {
        double best = -1.0, best_b = 0.0;
        for (const auto& row : rows)
            if (row.n_spins == n && row.temperature == t && !row.failed && row.gamma > best) {
                best = row.gamma;
                best_b = row.b;
            }
        return {best, best_b};
    }
};

inline std::vector<double> default_b_grid(double b_min = 1e-4, double b_max = 1.0,
                                          int points_per_decade = 40) {
    std::vector<double> grid;
    const double decades = std::log10(b_max / b_min);
    const int n = std::max(2, static_cast<int>(std::round(points_per_decade * decades)) + 1);
    for (int i = 0; i < n; ++i)
        grid.push_back(b_min * std::pow(b_max / b_min, static_cast<double>(i) / (n - 1)));
    return grid;
}

/// Entanglement sweep over a (N, T, b) grid: per point, the convex-roof
/// Meyer-Wallach of the thermal state, best of restarts. Optimizer
/// failures are recorded as missing values; the sweep continues.
inline SweepResult sweep(const std::vector<int>& n_list, const std::vector<double>& temps,
                         const std::vector<double>& b_grid, const RoofConfig& base_config) {
    SweepResult result;
    for (int n : n_list)
        for (double t : temps)
            for (std::size_t bi = 0; bi < b_grid.size(); ++bi) {
                SweepRow row;
                row.n_spins = n;
                row.temperature = t;
                row.b = b_grid[bi];
                row.optimizer = to_string(base_config.algorithm);
                row.restarts = base_config.restarts;
                const auto t0 = std::chrono::steady_clock::now();
                try {
                    RoofConfig config = base_config;
                    // decorrelate grid points while keeping runs reproducible
                    config.seed = mix_seed(base_config.seed,
                                           0x5151ull * (bi + 1) + 0x9191ull * n +
                                               static_cast<std::uint64_t>(1e3 * std::log10(t) + 1e6));
                    const ThermalState state = thermal_state(RingModel{n, 1.0, b_grid[bi]}, t);
                    const RoofResult roof = thermal_meyer_wallach(state, config);
                    row.gamma = roof.value;
                    std::vector<double> vals;
                    for (int i = 0; i < roof.report.n_restarts; ++i)
                        if (!roof.report.restart_failed[i])
                            vals.push_back(roof.report.final_values[i]);
                    std::sort(vals.begin(), vals.end());
                    row.gamma_err_estimate = vals.size() > 1 ? vals[1] - vals[0] : 0.0;
                } catch (const std::exception&) {
                    row.failed = true;
                }
                row.seconds =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                result.rows.push_back(std::move(row));
            }
    return result;
}

struct CurvePoint {
    double temperature = 0.0;
    double gamma_max = 0.0;
    double b_at_max = 0.0;
};

struct CurveResult {
    int n_spins = 0;
    std::vector<CurvePoint> points;
    double b_fwhm = 0.0;  // b at which the T=0 ground state has gamma = 1/2
};

/// Ground state of the ring (exact T = 0 limit).
inline Vector ring_ground_state(const RingModel& model) {
    const SymmetricEigenbasis basis = symmetric_eigenbasis(model);
    return basis.vectors.col(0);
}

/// Maximal thermal entanglement per temperature, maximizing the convex-roof
/// Meyer-Wallach over b by golden-section search in log b, plus the T = 0
/// field value where the ground-state measure crosses 1/2.
inline CurveResult max_entanglement_curve(int n_spins, const std::vector<double>& temps,
                                          const RoofConfig& base_config, double b_min = 1e-3,
                                          double b_max = 1.0, double b_rel_tol = 5e-3) {
    CurveResult result;
    result.n_spins = n_spins;
    const double inv_gold = 1.0 / detail::golden_ratio;

    for (std::size_t ti = 0; ti < temps.size(); ++ti) {
        const double t = temps[ti];
        auto gamma_at = [&](double logb) {
            RoofConfig config = base_config;
            config.seed = mix_seed(base_config.seed, 0xc0ffeeull + ti);
            const ThermalState state =
                thermal_state(RingModel{n_spins, 1.0, std::exp(logb)}, t);
            return thermal_meyer_wallach(state, config).value;
        };
        double lo = std::log(b_min), hi = std::log(b_max);
        double x1 = hi - inv_gold * (hi - lo);
        double x2 = lo + inv_gold * (hi - lo);
        double f1 = gamma_at(x1), f2 = gamma_at(x2);
        while (hi - lo > b_rel_tol) {
            if (f1 < f2) {  // maximize
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_gold * (hi - lo);
                f2 = gamma_at(x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_gold * (hi - lo);
                f1 = gamma_at(x1);
            }
        }
        CurvePoint point;
        point.temperature = t;
        point.b_at_max = std::exp(0.5 * (lo + hi));
        point.gamma_max = std::max(f1, f2);
        result.points.push_back(point);
    }

    // T = 0: bisect the ground-state Meyer-Wallach for the 1/2 crossing
    auto ground_gamma = [&](double b) {
        return meyer_wallach(ring_ground_state(RingModel{n_spins, 1.0, b}), n_spins);
    };
    double lo = 1e-3, hi = 4.0;
    while (ground_gamma(hi) > 0.5 && hi < 64.0) hi *= 2.0;
    for (int iter = 0; iter < 60; ++iter) {
        const double mid = std::sqrt(lo * hi);
        if (ground_gamma(mid) > 0.5)
            lo = mid;
        else
            hi = mid;
        if (hi / lo < 1.0 + 1e-10) break;
    }
    result.b_fwhm = std::sqrt(lo * hi);
    return result;
}

}  // namespace convexroof
