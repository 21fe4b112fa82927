#include <catch_amalgamated.hpp>

#include "convexroof/ensembles.hpp"
#include "helpers.hpp"

using namespace convexroof;
using Catch::Approx;

TEST_CASE("identity Stiefel point recovers the eigendecomposition", "[ensembles]") {
    const DensityMatrix rho = random_density(4, 3, 31);
    const StiefelPoint id{3, 3, Matrix::Identity(3, 3)};
    const PureEnsemble ens = ensemble_from_stiefel(rho, id);
    REQUIRE(ens.cardinality() == 3);
    for (Index i = 0; i < 3; ++i) {
        CHECK(ens.members[i].p == Approx(rho.eigenvalues()[i]));
        // states equal the eigenvectors up to phase
        const Complex overlap = ens.members[i].psi.dot(rho.eigenvectors().col(i));
        CHECK(std::abs(overlap) == Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("rank-1 density matrix yields a constant ensemble", "[ensembles]") {
    Rng rng(5);
    const Vector chi = random_pure_state(4, rng);
    const DensityMatrix rho = DensityMatrix::pure(chi);
    const StiefelPoint u{5, 1, random_stiefel(5, 1, rng)};
    const PureEnsemble ens = ensemble_from_stiefel(rho, u);
    for (const auto& mem : ens.members) {
        if (mem.discarded) continue;
        CHECK(std::abs(mem.psi.dot(chi)) == Approx(1.0).margin(1e-10));
    }
}

TEST_CASE("ensemble reconstructs the density matrix (Schroedinger-HJW)", "[ensembles]") {
    Rng rng(41);
    const DensityMatrix rho = random_density(4, 3, 77);
    const StiefelPoint u{7, 3, random_stiefel(7, 3, rng)};
    const PureEnsemble ens = ensemble_from_stiefel(rho, u);
    double total = 0.0;
    for (const auto& mem : ens.members) total += mem.p;
    CHECK(total == Approx(1.0).margin(1e-10));
    CHECK((ens.reconstruct(4) - rho.matrix()).norm() < 1e-12);
}

TEST_CASE("ensemble rejects rank mismatch", "[ensembles]") {
    Rng rng(1);
    const DensityMatrix rho = random_density(4, 3, 7);
    const StiefelPoint wrong{5, 2, random_stiefel(5, 2, rng)};
    CHECK_THROWS_AS(ensemble_from_stiefel(rho, wrong), InvalidInputError);
}

TEST_CASE("objective_h special cases", "[ensembles]") {
    Rng rng(51);
    const DensityMatrix rho = random_density(4, 2, 13);
    const Index k = 6;

    // constant measure: h == c for any Stiefel point
    const Measure c = constant_measure(0.25);
    for (int rep = 0; rep < 3; ++rep) {
        const StiefelPoint u{k, 2, random_stiefel(k, 2, rng)};
        CHECK(objective_h(rho, u, c) == Approx(0.25).margin(1e-12));
    }

    // identity point: h = sum_i lambda_i m(chi_i)
    const Measure entropy = entropy_measure(2, 2);
    const StiefelPoint id{2, 2, Matrix::Identity(2, 2)};
    double expected = 0.0;
    for (Index i = 0; i < 2; ++i)
        expected += rho.eigenvalues()[i] *
                    entropy.value(rho.eigenvectors().col(i));
    CHECK(objective_h(rho, id, entropy) == Approx(expected).epsilon(1e-12));

    // pure rho: h = m(chi_1) for every u
    const DensityMatrix pure = random_density(4, 1, 17);
    const double m_chi = entropy.value(pure.eigenvectors().col(0));
    for (int rep = 0; rep < 3; ++rep) {
        const StiefelPoint u{4, 1, random_stiefel(4, 1, rng)};
        CHECK(objective_h(pure, u, entropy) == Approx(m_chi).margin(1e-10));
    }
}

TEST_CASE("objective_h is invariant under per-member phase redundancy", "[ensembles]") {
    // left-multiplying U by a k x k diagonal unitary changes every member
    // state by a global phase only; h is blind to that. (Right
    // multiplication by r x r phases changes the member directions and is
    // NOT a symmetry, only the probabilities survive it.)
    Rng rng(61);
    const DensityMatrix rho = random_density(8, 3, 19);
    const Measure m = tangle_measure();
    const StiefelPoint u{7, 3, random_stiefel(7, 3, rng)};
    Vector phases(7);
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    for (Index i = 0; i < 7; ++i) phases[i] = std::exp(Complex(0, angle(rng)));
    const StiefelPoint rotated{7, 3, phases.asDiagonal() * u.u};
    CHECK(objective_h(rho, rotated, m) == Approx(objective_h(rho, u, m)).margin(1e-10));

    // right-multiplication preserves the probability vector
    Vector rphases(3);
    for (Index i = 0; i < 3; ++i) rphases[i] = std::exp(Complex(0, angle(rng)));
    const PureEnsemble a = ensemble_from_stiefel(rho, u);
    const PureEnsemble b =
        ensemble_from_stiefel(rho, StiefelPoint{7, 3, u.u * rphases.asDiagonal()});
    for (Index i = 0; i < 7; ++i) CHECK(a.members[i].p == Approx(b.members[i].p).margin(1e-12));
}

TEST_CASE("objective gradient matches finite differences", "[ensembles]") {
    SECTION("constant measure") {
        Rng rng(71);
        const DensityMatrix rho = random_density(4, 2, 23);
        const StiefelPoint u{6, 2, random_stiefel(6, 2, rng)};
        const ObjectiveGradient g = objective_gradient(rho, u, constant_measure(0.4));
        const ObjectiveGradient fd = testutil::objective_fd(rho, u, constant_measure(0.4));
        CHECK(testutil::max_rel_error(g.d_re, fd.d_re) < 1e-6);
        CHECK(testutil::max_rel_error(g.d_im, fd.d_im) < 1e-6);
    }
    SECTION("tangle on a rank-2 three-qubit state") {
        Rng rng(72);
        const DensityMatrix rho = random_density(8, 2, 29);
        const StiefelPoint u{4, 2, random_stiefel(4, 2, rng)};
        const Measure m = tangle_measure();
        const ObjectiveGradient g = objective_gradient(rho, u, m);
        const ObjectiveGradient fd = testutil::objective_fd(rho, u, m);
        CHECK(testutil::max_rel_error(g.d_re, fd.d_re) < 1e-6);
        CHECK(testutil::max_rel_error(g.d_im, fd.d_im) < 1e-6);
    }
    SECTION("Meyer-Wallach on a rank-2 two-qubit state") {
        Rng rng(73);
        const DensityMatrix rho = random_density(4, 2, 37);
        const StiefelPoint u{6, 2, random_stiefel(6, 2, rng)};
        const Measure m = meyer_wallach_measure(2);
        const ObjectiveGradient g = objective_gradient(rho, u, m);
        const ObjectiveGradient fd = testutil::objective_fd(rho, u, m);
        CHECK(testutil::max_rel_error(g.d_re, fd.d_re) < 1e-6);
        CHECK(testutil::max_rel_error(g.d_im, fd.d_im) < 1e-6);
    }
}

TEST_CASE("objective gradient at 100 random points per bundled measure", "[ensembles]") {
    struct Case {
        DensityMatrix rho;
        Index k;
        Measure m;
    };
    const std::vector<Case> cases = {
        {random_density(4, 2, 101), 4, entropy_measure(2, 2)},
        {random_density(8, 2, 102), 4, tangle_measure()},
        {random_density(8, 3, 103), 5, meyer_wallach_measure(3)},
    };
    Rng rng(811);
    for (const auto& c : cases) {
        double worst = 0.0;
        for (int rep = 0; rep < 100; ++rep) {
            const StiefelPoint u{c.k, c.rho.rank(), random_stiefel(c.k, c.rho.rank(), rng)};
            const ObjectiveGradient g = objective_gradient(c.rho, u, c.m);
            const ObjectiveGradient fd = testutil::objective_fd(c.rho, u, c.m);
            worst = std::max({worst, testutil::max_rel_error(g.d_re, fd.d_re),
                              testutil::max_rel_error(g.d_im, fd.d_im)});
        }
        INFO("measure " << c.m.name);
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("default cardinality is rank + 4", "[ensembles]") {
    CHECK(default_cardinality(random_density(4, 2, 1)) == 6);
    CHECK(default_cardinality(random_density(4, 1, 2)) == 5);
    CHECK(default_cardinality(random_density(8, 8, 3)) == 12);
}

TEST_CASE("members below the probability threshold are discarded", "[ensembles]") {
    const DensityMatrix rho = random_density(4, 2, 91);
    // embed the identity in a larger Stiefel point: rows beyond r have p = 0
    Matrix u = Matrix::Zero(6, 2);
    u(0, 0) = 1.0;
    u(1, 1) = 1.0;
    const PureEnsemble ens = ensemble_from_stiefel(rho, StiefelPoint{6, 2, u});
    CHECK_FALSE(ens.members[0].discarded);
    CHECK_FALSE(ens.members[1].discarded);
    for (Index i = 2; i < 6; ++i) {
        CHECK(ens.members[i].discarded);
        CHECK(ens.members[i].p == Approx(0.0).margin(1e-14));
    }
    // gradient contributions of discarded members vanish
    const ObjectiveGradient g = objective_gradient(rho, StiefelPoint{6, 2, u},
                                                   entropy_measure(2, 2));
    for (Index i = 2; i < 6; ++i) {
        CHECK(g.d_re.row(i).norm() == 0.0);
        CHECK(g.d_im.row(i).norm() == 0.0);
    }
}
