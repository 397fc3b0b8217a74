#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "driftvb/engine.hpp"
#include "driftvb/expfam.hpp"
#include "driftvb/models.hpp"
#include "driftvb/rng.hpp"
#include "driftvb/streams.hpp"

namespace driftvb {

/// Equivalent sample size of a posterior block: the pseudo-count mass.
///   Beta / Dirichlet: sum of standard concentrations.
///   NormalGamma:      the kappa (count) hyperparameter.
///   Gamma:            2 * shape (each Gaussian precision observation
///                     adds 1/2 to the shape; library convention).
///   Normal:           the precision (count under unit-precision
///                     observations; library convention).
inline double ess(const NaturalParams& posterior) {
    check_domain(posterior);
    const auto& e = posterior.eta;
    switch (posterior.family.family) {
        case Family::Beta:
            return (e[0] + 1.0) + (e[1] + 1.0);
        case Family::Dirichlet: {
            double acc = 0.0;
            for (double v : e) acc += v + 1.0;
            return acc;
        }
        case Family::NormalGamma:
            return -2.0 * e[3];
        case Family::Gamma:
            return 2.0 * (e[0] + 1.0);
        case Family::Normal:
            return -2.0 * e[1];
        case Family::NormalKnownPrecision:
            throw std::invalid_argument("ess: not defined for NormalKnownPrecision");
    }
    throw std::logic_error("unreachable");
}

inline double ess(const FamilySpec&, const NaturalParams& posterior) { return ess(posterior); }

namespace detail {

// Student-t log-density with dof nu, location mu, precision lam.
inline double log_student_t(double x, double nu, double mu, double lam) {
    return log_gamma((nu + 1.0) / 2.0) - log_gamma(nu / 2.0) + 0.5 * std::log(lam / (nu * M_PI)) -
           (nu + 1.0) / 2.0 * std::log1p(lam * (x - mu) * (x - mu) / nu);
}

// Posterior-predictive log-density of one observation under a
// NormalGamma block: Student-t with 2a dof.
inline double log_predictive_normal_gamma(const NaturalParams& block, double x) {
    const auto s = normal_gamma_standard(block);
    const double lam = s.shape * s.kappa / (s.rate * (s.kappa + 1.0));
    return log_student_t(x, 2.0 * s.shape, s.mean, lam);
}

inline double log_sum_exp(const std::vector<double>& v) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double x : v) mx = std::max(mx, x);
    if (!std::isfinite(mx)) return mx;
    double acc = 0.0;
    for (double x : v) acc += std::exp(x - mx);
    return mx + std::log(acc);
}

}  // namespace detail

inline constexpr int kPredictiveMcSamples = 1000;

/// Test marginal log-likelihood: the mean over test points of the log
/// posterior-predictive density.  Closed form for the Bernoulli and
/// Gaussian models (Beta-Bernoulli ratio, Student-t); Monte Carlo over
/// q(beta) with a fixed sample count for mixtures and regression.
inline double tmll(const ModelSpec& model, const std::vector<NaturalParams>& posterior,
                   const std::vector<Observation>& test, std::uint64_t mc_seed = 0x7e5,
                   int mc_samples = kPredictiveMcSamples) {
    if (test.empty()) throw std::invalid_argument("tmll: empty test set");
    if (mc_samples < 1) throw std::invalid_argument("tmll: mc_samples must be >= 1");
    detail::validate_blocks(model, posterior, "posterior");
    double acc = 0.0;
    switch (model.likelihood) {
        case Likelihood::Bernoulli: {
            const auto s = beta_standard(posterior[0]);
            const double p1 = s.alpha / (s.alpha + s.beta);
            for (const auto& x : test) acc += std::log(x[0] == 1.0 ? p1 : 1.0 - p1);
            return acc / test.size();
        }
        case Likelihood::Gaussian: {
            for (const auto& x : test) {
                acc += detail::log_predictive_normal_gamma(posterior[0], x[0]);
            }
            return acc / test.size();
        }
        case Likelihood::GaussianMixture: {
            const int k = model.num_components;
            const int dims = model.obs_dim;
            // Draw S posteriors; per test point average the mixture
            // density over draws, in log space.
            std::vector<std::vector<double>> w(mc_samples, std::vector<double>(k));
            std::vector<std::vector<double>> mu(mc_samples, std::vector<double>(k * dims));
            std::vector<std::vector<double>> tau(mc_samples, std::vector<double>(k * dims));
            const auto walpha = dirichlet_standard(posterior[0]);
            for (int s = 0; s < mc_samples; ++s) {
                RngStream rng(mc_seed, static_cast<std::uint64_t>(s));
                double z = 0.0;
                for (int c = 0; c < k; ++c) {
                    w[s][c] = rng.gamma(walpha[c], 1.0);
                    z += w[s][c];
                }
                for (int c = 0; c < k; ++c) w[s][c] /= z;
                for (int b = 0; b < k * dims; ++b) {
                    const auto ng = normal_gamma_standard(posterior[1 + b]);
                    const double t = rng.gamma(ng.shape, ng.rate);
                    tau[s][b] = t;
                    mu[s][b] = ng.mean + rng.normal() / std::sqrt(ng.kappa * t);
                }
            }
            std::vector<double> per_draw(mc_samples);
            for (const auto& x : test) {
                for (int s = 0; s < mc_samples; ++s) {
                    std::vector<double> comp(k);
                    for (int c = 0; c < k; ++c) {
                        double lp = std::log(w[s][c]);
                        for (int d = 0; d < dims; ++d) {
                            const double t = tau[s][c * dims + d];
                            const double m = mu[s][c * dims + d];
                            lp += 0.5 * std::log(t) - kHalfLog2Pi -
                                  0.5 * t * (x[d] - m) * (x[d] - m);
                        }
                        comp[c] = lp;
                    }
                    per_draw[s] = detail::log_sum_exp(comp);
                }
                acc += detail::log_sum_exp(per_draw) - std::log(double(mc_samples));
            }
            return acc / test.size();
        }
        case Likelihood::LinearRegression: {
            const int d = model.num_features;
            std::vector<double> cm(d + 1), cs(d + 1);
            for (int j = 0; j <= d; ++j) {
                const auto s = normal_standard(posterior[j]);
                cm[j] = s.mean;
                cs[j] = 1.0 / std::sqrt(s.precision);
            }
            const auto g = gamma_standard(posterior[d + 1]);
            std::vector<double> per_draw(mc_samples);
            for (const auto& x : test) {
                for (int s = 0; s < mc_samples; ++s) {
                    RngStream rng(mc_seed, static_cast<std::uint64_t>(s) + 0x9000);
                    double pred = cm[0] + cs[0] * rng.normal();
                    for (int i = 1; i <= d; ++i) {
                        pred += (cm[i] + cs[i] * rng.normal()) * x[i - 1];
                    }
                    const double gamma_draw = rng.gamma(g.shape, g.rate);
                    per_draw[s] = 0.5 * std::log(gamma_draw) - kHalfLog2Pi -
                                  0.5 * gamma_draw * (x[d] - pred) * (x[d] - pred);
                }
                double marg = detail::log_sum_exp(per_draw) - std::log(double(mc_samples));
                // Feature marginals are closed form.
                for (int i = 1; i <= d; ++i) {
                    marg += detail::log_predictive_normal_gamma(posterior[d + 1 + i], x[i - 1]);
                }
                acc += marg;
            }
            return acc / test.size();
        }
    }
    throw std::logic_error("unreachable");
}

/// Per-step record of everything the experiment traces.
struct TraceRecord {
    int t = 0;
    std::string learner;
    double elbo = 0.0;
    std::vector<double> ess;           // per block
    std::vector<double> expected_rho;  // per rho variable; empty unless HPP/MHPP
    std::optional<double> tmll;
    std::vector<double> summary;  // posterior first moments, flattened
};

/// Sum of per-step TMLL values.
inline double aggregate_tmll(const std::vector<TraceRecord>& trace) {
    if (trace.empty()) throw std::invalid_argument("aggregate_tmll: empty trace");
    double acc = 0.0;
    for (const auto& r : trace) {
        if (!r.tmll) {
            throw std::invalid_argument("aggregate_tmll: record at t=" + std::to_string(r.t) +
                                        " has no tmll");
        }
        acc += *r.tmll;
    }
    return acc;
}

/// First-moment summary per block (Beta mean, Dirichlet means, the
/// NormalGamma location and expected precision, ...), flattened in
/// block order.  These are the series plotted against time.
inline std::vector<double> posterior_summary(const std::vector<NaturalParams>& posterior) {
    std::vector<double> out;
    for (size_t b = 0; b < posterior.size(); ++b) {
        const auto& p = posterior[b];
        switch (p.family.family) {
            case Family::Beta: {
                const auto s = beta_standard(p);
                out.push_back(s.alpha / (s.alpha + s.beta));
                break;
            }
            case Family::Dirichlet: {
                const auto a = dirichlet_standard(p);
                double z = 0.0;
                for (double v : a) z += v;
                for (double v : a) out.push_back(v / z);
                break;
            }
            case Family::Gamma: {
                const auto s = gamma_standard(p);
                out.push_back(s.shape / s.rate);
                break;
            }
            case Family::NormalGamma: {
                const auto s = normal_gamma_standard(p);
                out.push_back(s.mean);
                out.push_back(s.shape / s.rate);
                break;
            }
            case Family::Normal:
                out.push_back(normal_standard(p).mean);
                break;
            case Family::NormalKnownPrecision:
                out.push_back(p.eta[0] / p.family.known_precision);
                break;
        }
    }
    return out;
}

}  // namespace driftvb
