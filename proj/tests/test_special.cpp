#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "driftvb/special_functions.hpp"

using namespace driftvb;

TEST_CASE("log_gamma matches reference to 1e-12 relative on [1e-3, 1e6]") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> expo(-3.0, 6.0);
    for (int i = 0; i < 2000; ++i) {
        const double x = std::pow(10.0, expo(rng));
        const double ref = boost::math::lgamma(x);
        const double got = log_gamma(x);
        // Relative, with an absolute floor near the zeros at x = 1, 2.
        REQUIRE(std::abs(got - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
    }
}

TEST_CASE("digamma matches reference to 1e-12 relative on [1e-3, 1e6]") {
    std::mt19937 rng(43);
    std::uniform_real_distribution<double> expo(-3.0, 6.0);
    for (int i = 0; i < 2000; ++i) {
        const double x = std::pow(10.0, expo(rng));
        const double ref = boost::math::digamma(x);
        const double got = digamma(x);
        REQUIRE(std::abs(got - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
    }
}

TEST_CASE("special function domain errors") {
    REQUIRE_THROWS_AS(log_gamma(0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(log_gamma(-1.5), std::invalid_argument);
    REQUIRE_THROWS_AS(digamma(0.0), std::invalid_argument);
}

TEST_CASE("log_beta basics") {
    REQUIRE(log_beta(1.0, 1.0) == Catch::Approx(0.0).margin(1e-14));
    REQUIRE(log_beta(2.0, 2.0) == Catch::Approx(std::log(1.0 / 6.0)).epsilon(1e-12));
}
