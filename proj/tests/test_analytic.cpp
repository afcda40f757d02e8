#include <doctest.h>

#include <cmath>
#include <random>

#include "isoprob/analytic.hpp"
#include "isoprob/errors.hpp"
#include "oracles.hpp"

using namespace isoprob;
using namespace isoprob::analytic;

TEST_CASE("lmsz_asymptotic examples") {
    CHECK(lmsz_asymptotic(0.0, 3.0) == 0.0);
    CHECK(lmsz_asymptotic(1.0, std::numbers::pi / std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(lmsz_asymptotic(1.0, 8.0) == doctest::Approx(1.0 - std::exp(-std::numbers::pi / 8)).epsilon(1e-14));
    CHECK(lmsz_asymptotic(1.0, 8.0) == doctest::Approx(0.32477).epsilon(1e-4));
    CHECK(lmsz_asymptotic(1.3, -2.0) == lmsz_asymptotic(1.3, 2.0));
}

TEST_CASE("lmsz_asymptotic rejects resonance and negative alpha") {
    CHECK_THROWS_AS(lmsz_asymptotic(1.0, 0.0), DomainError);
    CHECK_THROWS_AS(lmsz_asymptotic(-1.0, 1.0), ContractError);
}

TEST_CASE("aeh_exact examples") {
    CHECK(aeh_exact(1.0, 0.0) == 0.0);
    CHECK(aeh_exact(0.5, 0.0) == 1.0);
    CHECK(aeh_exact(1.0, 1.0) == doctest::Approx(std::pow(std::tanh(std::numbers::pi), 2)).epsilon(1e-14));
    CHECK(aeh_exact(1.0, 1.0) == doctest::Approx(0.992558).epsilon(1e-6));
}

TEST_CASE("aeh_exact agrees with the plain formula away from cancellation") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ua(0.0, 3.0), ub(-3.0, 3.0);
    for (int k = 0; k < 2000; ++k) {
        const double a = ua(rng), b = ub(rng);
        CHECK(std::fabs(aeh_exact(a, b) - oracle::aeh(a, b)) < 1e-12);
    }
}

TEST_CASE("aeh_exact is exactly even in beta") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ua(0.0, 5.0), ub(0.0, 5.0);
    for (int k = 0; k < 1000; ++k) {
        const double a = ua(rng), b = ub(rng);
        CHECK(aeh_exact(a, b) == aeh_exact(a, -b));
    }
}

TEST_CASE("aeh_exact is continuous across |beta| = alpha") {
    for (double a : {0.1, 0.5, 1.0, 1.7, 3.0, 4.9}) {
        CHECK(std::fabs(aeh_exact(a, a + 1e-9) - aeh_exact(a, a - 1e-9)) < 1e-7);
        CHECK(std::fabs(aeh_exact(a, -a - 1e-9) - aeh_exact(a, -a + 1e-9)) < 1e-7);
    }
}

TEST_CASE("outputs stay in [0, 1]") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ua(0.0, 5.0), ub(-5.0, 5.0);
    for (int k = 0; k < 10000; ++k) {
        const double a = ua(rng), b = ub(rng);
        const double p = aeh_exact(a, b);
        REQUIRE(p >= 0.0);
        REQUIRE(p <= 1.0);
        if (b != 0.0) {
            const double q = lmsz_asymptotic(a, b);
            REQUIRE(q >= 0.0);
            REQUIRE(q <= 1.0);
        }
    }
}

TEST_CASE("rabi_resonant examples and agreement with aeh_exact") {
    CHECK(rabi_resonant(0.5) == 1.0);
    CHECK(rabi_resonant(1.0) == 0.0);
    CHECK(rabi_resonant(0.25) == doctest::Approx(0.5).epsilon(1e-15));
    for (int k = 0; k <= 500; ++k) {
        const double a = 0.01 * k;
        CHECK(aeh_exact(a, 0.0) == rabi_resonant(a));
    }
}
