#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "driftvb/engine.hpp"
#include "driftvb/models.hpp"

using namespace driftvb;

namespace {

Batch batch_of(std::vector<Observation> train) {
    Batch b;
    b.train = std::move(train);
    return b;
}

}  // namespace

TEST_CASE("beta binomial factory") {
    const auto m = make_beta_binomial(1.0, 1.0);
    REQUIRE(m.blocks.size() == 1);
    REQUIRE(m.blocks[0].prior.eta == std::vector<double>{0.0, 0.0});
    REQUIRE_THROWS_AS(make_beta_binomial(0.0, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(make_beta_binomial(1.0, -2.0), std::invalid_argument);
}

TEST_CASE("gaussian model carries the flat NormalGamma prior") {
    const auto m = make_gaussian_model();
    const auto s = normal_gamma_standard(m.blocks[0].prior);
    REQUIRE(s.mean == 0.0);
    REQUIRE(s.kappa == Catch::Approx(1e-10));
    REQUIRE(s.shape == 1.0);
    REQUIRE(s.rate == 1.0);

    // Posterior mean after n constant observations approaches c;
    // checked against the standard-coordinate NormalGamma update.
    const double c = 3.7;
    std::vector<Observation> obs(200, {c});
    const FitResult f2 = fit_batch(m, m.priors(), batch_of(obs), {});
    const auto post = normal_gamma_standard(f2.posterior[0]);
    const double n = 200.0;
    const double kappa_n = 1e-10 + n;
    const double mean_n = (1e-10 * 0.0 + n * c) / kappa_n;
    REQUIRE(post.mean == Catch::Approx(mean_n).margin(1e-12));
    REQUIRE(post.kappa == Catch::Approx(kappa_n).margin(1e-12));
    REQUIRE(post.shape == Catch::Approx(1.0 + n / 2.0).margin(1e-12));
    REQUIRE(std::abs(post.mean - c) < 1e-8);
}

TEST_CASE("mixture factory block counting") {
    const auto m5 = make_mixture_model(5, 1);
    REQUIRE(m5.num_components == 5);
    REQUIRE(m5.blocks.size() == 1 + 5);

    const auto m = make_mixture_model(2, 1);
    REQUIRE(m.blocks.size() == 3);
    REQUIRE(m.blocks[0].prior.family.family == Family::Dirichlet);
    REQUIRE(m.blocks[1].prior.family.family == Family::NormalGamma);

    REQUIRE_THROWS_AS(make_mixture_model(1, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(make_mixture_model(3, 0), std::invalid_argument);
}

TEST_CASE("linear regression structure and OLS agreement") {
    const auto m3 = make_linear_regression(3);
    // b0..b3, noise, x1..x3
    REQUIRE(m3.blocks.size() == 4 + 1 + 3);
    REQUIRE(m3.blocks[4].prior.family.family == Family::Gamma);
    REQUIRE_THROWS_AS(make_linear_regression(0), std::invalid_argument);

    // y = 2x + 1 with tiny noise: posterior coefficient means must land
    // within 0.1 of the OLS solution (itself within 0.1 of (1,2)).
    const auto m = make_linear_regression(1);
    std::vector<Observation> obs;
    for (int i = 0; i < 500; ++i) {
        const double x = -2.0 + 4.0 * (i / 499.0);
        const double noise = 0.01 * std::sin(7919.0 * (i + 1));
        obs.push_back({x, 1.0 + 2.0 * x + noise});
    }
    const FitResult fit = fit_batch(m, m.priors(), batch_of(obs), {});

    // OLS oracle via the normal equations.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = obs.size();
    for (const auto& o : obs) {
        sx += o[0];
        sy += o[1];
        sxx += o[0] * o[0];
        sxy += o[0] * o[1];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;

    REQUIRE(normal_standard(fit.posterior[0]).mean == Catch::Approx(intercept).margin(0.1));
    REQUIRE(normal_standard(fit.posterior[1]).mean == Catch::Approx(slope).margin(0.1));
    REQUIRE(std::abs(intercept - 1.0) < 0.1);
    REQUIRE(std::abs(slope - 2.0) < 0.1);
}

TEST_CASE("additivity: one batch equals concatenated sub-batches for latent-free models") {
    const auto m = make_gaussian_model();
    std::vector<Observation> all;
    for (int i = 0; i < 60; ++i) all.push_back({std::sin(i * 0.7) * 3.0});

    const FitResult whole = fit_batch(m, m.priors(), batch_of(all), {});

    std::vector<Observation> first(all.begin(), all.begin() + 25);
    std::vector<Observation> second(all.begin() + 25, all.end());
    const FitResult part1 = fit_batch(m, m.priors(), batch_of(first), {});
    const FitResult part2 = fit_batch(m, part1.posterior, batch_of(second), {});

    for (size_t i = 0; i < 4; ++i) {
        REQUIRE(part2.posterior[0].eta[i] ==
                Catch::Approx(whole.posterior[0].eta[i]).margin(1e-12));
    }
}

TEST_CASE("conjugacy closure: priors map to in-domain posteriors of the same family") {
    const auto m = make_mixture_model(3, 2);
    std::vector<Observation> obs;
    for (int i = 0; i < 40; ++i) {
        obs.push_back({(i % 3) * 5.0 + 0.01 * i, (i % 3) * -4.0 + 0.02 * i});
    }
    const FitResult fit = fit_batch(m, m.priors(), batch_of(obs), {});
    for (size_t b = 0; b < m.blocks.size(); ++b) {
        REQUIRE(fit.posterior[b].family == m.blocks[b].prior.family);
        REQUIRE(in_domain(fit.posterior[b]));
    }
    for (const auto& phi : fit.locals.responsibilities) {
        double sum = 0.0;
        for (double p : phi) {
            REQUIRE(p >= 0.0);
            sum += p;
        }
        REQUIRE(sum == Catch::Approx(1.0).margin(1e-9));
    }
}
