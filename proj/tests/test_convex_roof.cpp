#include <catch_amalgamated.hpp>

#include "convexroof/convex_roof.hpp"
#include "helpers.hpp"

using namespace convexroof;
using Catch::Approx;

TEST_CASE("convex roof of a pure state equals the pure-state measure", "[convex-roof]") {
    const DensityMatrix rho = random_density(8, 1, 11);
    const Measure m = tangle_measure();
    RoofConfig config;
    config.restarts = 2;
    config.seed = 3;
    for (Algorithm algo : {Algorithm::cg, Algorithm::qn}) {
        config.algorithm = algo;
        const RoofResult res = convex_roof(rho, m, config);
        CHECK(res.value == Approx(m.value(rho.eigenvectors().col(0))).margin(1e-8));
    }
}

TEST_CASE("optimized roof never exceeds the eigen-ensemble value", "[convex-roof]") {
    const DensityMatrix rho = random_density(4, 3, 13);
    const Measure m = entropy_measure(2, 2);
    const StiefelPoint id{rho.rank(), rho.rank(),
                          Matrix::Identity(rho.rank(), rho.rank())};
    const double upper = objective_h(rho, id, m);
    RoofConfig config;
    config.restarts = 3;
    config.seed = 5;
    for (Algorithm algo : {Algorithm::cg, Algorithm::qn}) {
        config.algorithm = algo;
        const RoofResult res = convex_roof(rho, m, config);
        CHECK(res.value <= upper + 1e-9);
    }
}

TEST_CASE("the two optimizers agree on random rank-2 three-qubit states", "[convex-roof]") {
    const Measure m = tangle_measure();
    for (std::uint64_t seed : {201, 202}) {
        const DensityMatrix rho = random_density(8, 2, seed);
        RoofConfig config;
        config.restarts = 8;
        config.seed = seed;
        config.algorithm = Algorithm::cg;
        const double v_cg = convex_roof(rho, m, config).value;
        config.algorithm = Algorithm::qn;
        const double v_qn = convex_roof(rho, m, config).value;
        CHECK(v_cg == Approx(v_qn).margin(1e-6));
    }
}

TEST_CASE("roof reports carry restart bookkeeping", "[convex-roof]") {
    const DensityMatrix rho = random_density(4, 2, 17);
    RoofConfig config;
    config.restarts = 4;
    config.seed = 7;
    const double oracle = wootters_eof(rho);
    const RoofResult res = convex_roof(rho, entropy_measure(2, 2), config, oracle);
    CHECK(res.report.n_restarts == 5);  // + identity start
    CHECK(res.report.best_index >= 0);
    CHECK(res.report.success_rate >= 0.0);
    CHECK(res.cardinality == default_cardinality(rho));
    // the returned point reproduces the best value
    CHECK(objective_h(rho, res.point, entropy_measure(2, 2)) ==
          Approx(res.value).margin(1e-9));
}

TEST_CASE("roof is deterministic for a fixed seed", "[convex-roof]") {
    const DensityMatrix rho = random_density(4, 2, 23);
    RoofConfig config;
    config.restarts = 3;
    config.seed = 99;
    const RoofResult a = convex_roof(rho, entropy_measure(2, 2), config);
    const RoofResult b = convex_roof(rho, entropy_measure(2, 2), config);
    CHECK(a.value == b.value);
    REQUIRE(a.report.final_values.size() == b.report.final_values.size());
    for (std::size_t i = 0; i < a.report.final_values.size(); ++i)
        CHECK(a.report.final_values[i] == b.report.final_values[i]);
}
