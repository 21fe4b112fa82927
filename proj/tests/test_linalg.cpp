#include <catch_amalgamated.hpp>

#include "convexroof/density.hpp"
#include "convexroof/linalg.hpp"
#include "helpers.hpp"

using namespace convexroof;
using Catch::Approx;

TEST_CASE("eig_hermitian on identity and Pauli-x", "[linalg]") {
    const Matrix id = Matrix::Identity(2, 2);
    const EigResult e1 = eig_hermitian(id);
    CHECK(e1.eigenvalues[0] == Approx(1.0));
    CHECK(e1.eigenvalues[1] == Approx(1.0));

    Matrix sx(2, 2);
    sx << 0, 1, 1, 0;
    const EigResult e2 = eig_hermitian(sx);
    CHECK(e2.eigenvalues[0] == Approx(1.0));
    CHECK(e2.eigenvalues[1] == Approx(-1.0));
    // eigenvector of +1 is (1, 1)/sqrt(2) up to phase
    CHECK(std::abs(e2.eigenvectors(0, 0)) == Approx(1.0 / std::sqrt(2.0)).margin(1e-12));
    CHECK(std::abs(e2.eigenvectors(1, 0) / e2.eigenvectors(0, 0) - 1.0) < 1e-12);
}

TEST_CASE("eig_hermitian reconstructs a random 8x8 Hermitian matrix", "[linalg]") {
    Rng rng(7);
    const Matrix m = testutil::random_hermitian(8, rng);
    const EigResult e = eig_hermitian(m);
    const Matrix rebuilt =
        e.eigenvectors * e.eigenvalues.asDiagonal() * e.eigenvectors.adjoint();
    CHECK((rebuilt - m).norm() < 1e-10);
    // descending order and orthonormal eigenvectors
    for (Index i = 0; i + 1 < 8; ++i) CHECK(e.eigenvalues[i] >= e.eigenvalues[i + 1]);
    CHECK((e.eigenvectors.adjoint() * e.eigenvectors - Matrix::Identity(8, 8)).norm() < 1e-10);
    // per-pair residual
    for (Index i = 0; i < 8; ++i)
        CHECK((m * e.eigenvectors.col(i) - e.eigenvalues[i] * e.eigenvectors.col(i)).norm() <
              1e-10);
}

TEST_CASE("eig_hermitian rejects non-Hermitian input", "[linalg]") {
    Matrix m(2, 2);
    m << 0, 1, 0, 0;
    CHECK_THROWS_AS(eig_hermitian(m), InvalidInputError);
}

TEST_CASE("expm_skew basics", "[linalg]") {
    CHECK((expm_skew(Matrix::Zero(3, 3)) - Matrix::Identity(3, 3)).norm() < 1e-14);

    // x = i pi sigma_z / 2 -> diag(e^{i pi/2}, e^{-i pi/2})
    Matrix x = Matrix::Zero(2, 2);
    x(0, 0) = Complex(0, std::numbers::pi / 2);
    x(1, 1) = Complex(0, -std::numbers::pi / 2);
    const Matrix ex = expm_skew(x);
    CHECK(std::abs(ex(0, 0) - Complex(0, 1)) < 1e-12);
    CHECK(std::abs(ex(1, 1) - Complex(0, -1)) < 1e-12);

    Rng rng(3);
    const Matrix s = testutil::random_skew(5, rng);
    const Matrix u = expm_skew(s);
    CHECK((u.adjoint() * u - Matrix::Identity(5, 5)).norm() < 1e-10);
    CHECK((expm_skew(s) * expm_skew(-s) - Matrix::Identity(5, 5)).norm() < 1e-10);

    CHECK_THROWS_AS(expm_skew(testutil::random_hermitian(4, rng)), InvalidInputError);
}

TEST_CASE("partial traces of product, Bell and GHZ states", "[linalg]") {
    Vector up_up = Vector::Zero(4);
    up_up[0] = 1.0;
    const Matrix r1 = partial_trace_single(up_up, 1, 2);
    CHECK(std::abs(r1(0, 0) - 1.0) < 1e-14);
    CHECK(r1.norm() == Approx(1.0));

    Vector bell = Vector::Zero(4);
    bell[0] = bell[3] = 1.0 / std::sqrt(2.0);
    const Matrix r2 = partial_trace_single(bell, 1, 2);
    CHECK((r2 - 0.5 * Matrix::Identity(2, 2)).norm() < 1e-14);

    const Vector ghz = ghz_state(3);
    const Matrix r3 = partial_trace_single(ghz, 2, 3);
    CHECK((r3 - 0.5 * Matrix::Identity(2, 2)).norm() < 1e-14);

    CHECK_THROWS_AS(partial_trace_single(bell, 3, 2), InvalidInputError);
    CHECK_THROWS_AS(partial_trace_block(bell, 3, 2), InvalidInputError);
}

TEST_CASE("partial_trace_block agrees with the single-qubit variant", "[linalg]") {
    Rng rng(11);
    const Vector psi = random_pure_state(8, rng);
    const Matrix a = partial_trace_block(psi, 2, 4);
    const Matrix b = partial_trace_single(psi, 1, 3);
    CHECK((a - b).norm() < 1e-12);
}

TEST_CASE("both halves of a bipartition share their nonzero spectrum", "[linalg]") {
    Rng rng(13);
    for (int rep = 0; rep < 5; ++rep) {
        const Vector psi = random_pure_state(16, rng);
        for (const auto& [da, db] : {std::pair<Index, Index>{2, 8}, {4, 4}, {8, 2}}) {
            const Matrix ra = partial_trace_block(psi, da, db);
            // the complementary half: reshape column-major trick via reversal
            Vector swapped(psi.size());
            for (Index i = 0; i < da; ++i)
                for (Index j = 0; j < db; ++j) swapped[j * da + i] = psi[i * db + j];
            const Matrix rb = partial_trace_block(swapped, db, da);
            Eigen::SelfAdjointEigenSolver<Matrix> ea(ra), eb(rb);
            const Index nmin = std::min(da, db);
            const RealVector sa = ea.eigenvalues().tail(nmin);
            const RealVector sb = eb.eigenvalues().tail(nmin);
            CHECK((sa - sb).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
}

TEST_CASE("random_density invariants, rank and determinism", "[linalg]") {
    const DensityMatrix rho = random_density(4, 4, 99);
    CHECK(rho.rank() == 4);
    CHECK(std::abs(rho.matrix().trace().real() - 1.0) < 1e-12);
    CHECK(rho.eigenvalues().minCoeff() > 0.0);
    const Matrix rebuilt = rho.eigenvectors() * rho.eigenvalues().asDiagonal() *
                           rho.eigenvectors().adjoint();
    CHECK((rebuilt - rho.matrix()).norm() < 1e-10);

    const DensityMatrix pure = random_density(2, 1, 5);
    CHECK(pure.rank() == 1);
    CHECK(pure.eigenvalues()[0] == Approx(1.0));

    const DensityMatrix a = random_density(6, 3, 123), b = random_density(6, 3, 123);
    CHECK((a.matrix() - b.matrix()).norm() == 0.0);

    CHECK_THROWS_AS(random_density(3, 4, 1), InvalidInputError);
}

TEST_CASE("DensityMatrix validation", "[linalg]") {
    Matrix bad = Matrix::Identity(2, 2);  // trace 2
    CHECK_THROWS_AS(DensityMatrix::from_matrix(bad), InvalidInputError);

    Matrix neg(2, 2);
    neg << 1.5, 0, 0, -0.5;
    CHECK_THROWS_AS(DensityMatrix::from_matrix(neg), InvalidInputError);

    // rank threshold: tiny eigenvalue below 1e-12 * lambda_max does not count
    Matrix nearly_pure(2, 2);
    nearly_pure << 1.0 - 1e-13, 0, 0, 1e-13;
    CHECK(DensityMatrix::from_matrix(nearly_pure).rank() == 1);
}

TEST_CASE("random_stiefel is orthonormal and deterministic", "[linalg]") {
    Rng rng(17);
    const Matrix q = random_stiefel(7, 3, rng);
    CHECK((q.adjoint() * q - Matrix::Identity(3, 3)).norm() < 1e-12);
    Rng r1(4), r2(4);
    CHECK((random_stiefel(5, 5, r1) - random_stiefel(5, 5, r2)).norm() == 0.0);
}
