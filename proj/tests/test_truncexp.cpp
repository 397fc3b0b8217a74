#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "driftvb/truncated_exponential.hpp"
#include "oracles.hpp"

using namespace driftvb;

namespace {

// E[rho] by quadrature of the unnormalized density exp(omega rho) on [0,1].
double mean_by_quadrature(double omega) {
    const double z = oracles::integrate_composite(
        [&](double r) { return std::exp(omega * r); }, 0.0, 1.0, 8, 48);
    const double num = oracles::integrate_composite(
        [&](double r) { return r * std::exp(omega * r); }, 0.0, 1.0, 8, 48);
    return num / z;
}

}  // namespace

TEST_CASE("expected rho worked values") {
    REQUIRE(trunc_exp_mean(0.0) == Catch::Approx(0.5).margin(1e-15));

    const double q1 = mean_by_quadrature(1.0);
    REQUIRE(q1 == Catch::Approx(0.58197670686932642).epsilon(1e-12));
    REQUIRE(trunc_exp_mean(1.0) == Catch::Approx(q1).epsilon(1e-12));

    const double qm1 = mean_by_quadrature(-1.0);
    REQUIRE(trunc_exp_mean(-1.0) == Catch::Approx(qm1).epsilon(1e-12));
    REQUIRE(trunc_exp_mean(-1.0) == Catch::Approx(1.0 - q1).epsilon(1e-12));

    REQUIRE_THROWS_AS(trunc_exp_mean(std::numeric_limits<double>::infinity()),
                      std::invalid_argument);
}

TEST_CASE("expected rho symmetry and monotonicity") {
    double prev = -1.0;
    for (double omega = -60.0; omega <= 60.0; omega += 0.37) {
        const double m = trunc_exp_mean(omega);
        REQUIRE(m > 0.0);
        REQUIRE(m < 1.0);
        REQUIRE(m > prev);
        prev = m;
        REQUIRE(trunc_exp_mean(-omega) == Catch::Approx(1.0 - m).margin(1e-12));
    }
    // Continuity through the series switch at |omega| = 1e-4.
    REQUIRE(trunc_exp_mean(1.0000001e-4) == Catch::Approx(trunc_exp_mean(0.9999999e-4)).margin(1e-12));
}

TEST_CASE("log-normalizer matches quadrature and its gradient is the mean") {
    for (double omega : {-30.0, -5.0, -1.0, -1e-5, 0.0, 1e-5, 0.3, 2.0, 10.0, 40.0}) {
        const double z = oracles::integrate_composite(
            [&](double r) { return std::exp(omega * r); }, 0.0, 1.0, 8, 48);
        REQUIRE(trunc_exp_log_normalizer(omega) == Catch::Approx(std::log(z)).margin(1e-11));
        if (std::abs(omega) > 1e-3) {
            const double fd = oracles::finite_diff_scalar(trunc_exp_log_normalizer, omega, 1e-6);
            REQUIRE(fd == Catch::Approx(trunc_exp_mean(omega)).margin(1e-7));
        }
    }
}

TEST_CASE("variance equals the quadrature second moment") {
    for (double omega : {-8.0, -0.5, 0.0, 0.5, 3.0, 25.0}) {
        const double z = oracles::integrate_composite(
            [&](double r) { return std::exp(omega * r); }, 0.0, 1.0, 8, 48);
        const double m1 = mean_by_quadrature(omega);
        const double m2 = oracles::integrate_composite(
                              [&](double r) { return r * r * std::exp(omega * r); }, 0.0, 1.0, 8,
                              48) /
                          z;
        REQUIRE(trunc_exp_variance(omega) == Catch::Approx(m2 - m1 * m1).margin(1e-12));
    }
}

TEST_CASE("omega update substitutions") {
    REQUIRE(update_omega(5.0, 0.3, 0.1) == Catch::Approx(4.8).margin(1e-15));
    REQUIRE(update_omega(2.0, 2.0, 0.1) == Catch::Approx(0.1).margin(1e-15));
    const double w = update_omega(0.3, 5.0, 0.1);
    REQUIRE(w == Catch::Approx(-4.6).margin(1e-15));
    REQUIRE(trunc_exp_mean(w) < 0.5);  // forgetting regime
    REQUIRE_THROWS_AS(update_omega(-0.1, 0.0, 0.1), std::invalid_argument);
    REQUIRE_THROWS_AS(update_omega(std::nan(""), 0.0, 0.1), std::invalid_argument);
}
