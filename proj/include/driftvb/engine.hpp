#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "driftvb/expfam.hpp"
#include "driftvb/models.hpp"
#include "driftvb/rng.hpp"
#include "driftvb/streams.hpp"

namespace driftvb {

// Mean-field coordinate ascent (VMP-style) on one batch.  Each sweep
// updates the local responsibilities first, then every global block;
// both updates are exact coordinate maximizations, so the ELBO can
// never decrease.  A decrease beyond slack is a bug in an update rule,
// not a property of the data, and is reported as logic_error.

struct FitConfig {
    int max_iterations = 100;
    double relative_tolerance = 1e-4;  // on the relative ELBO increase
    std::uint64_t seed = 0;
};

struct FitResult {
    std::vector<NaturalParams> posterior;
    LocalParams locals;
    std::vector<double> elbo_trace;
    bool converged = false;
};

inline constexpr double kHalfLog2Pi = 0.91893853320467274178;

namespace detail {

inline void validate_fit_config(const FitConfig& cfg) {
    if (cfg.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
    if (!(cfg.relative_tolerance > 0.0)) {
        throw std::invalid_argument("relative_tolerance must be positive");
    }
}

inline void validate_blocks(const ModelSpec& model, const std::vector<NaturalParams>& params,
                            const char* what) {
    if (params.size() != model.blocks.size()) {
        throw std::invalid_argument(std::string(what) + ": expected " +
                                    std::to_string(model.blocks.size()) + " blocks, got " +
                                    std::to_string(params.size()));
    }
    for (size_t i = 0; i < params.size(); ++i) {
        if (!(params[i].family == model.blocks[i].prior.family)) {
            throw std::invalid_argument(std::string(what) + ": family mismatch at block '" +
                                        model.blocks[i].name + "'");
        }
        check_domain(params[i]);
    }
}

// Gaussian observation score against one NormalGamma block:
// E[ln N(x | mu, tau)] = t(x) . grad a(lambda) - ln sqrt(2 pi).
inline double gaussian_score(double x, const std::vector<double>& m) {
    return 0.5 * m[0] - 0.5 * x * x * m[1] + x * m[2] - 0.5 * m[3] - kHalfLog2Pi;
}

inline void add_scaled(std::vector<double>& acc, const std::vector<double>& v, double w) {
    for (size_t i = 0; i < acc.size(); ++i) acc[i] += w * v[i];
}

}  // namespace detail

/// E_q[ln p(x, z | beta)] for the given observations.
inline double expected_log_likelihood(const ModelSpec& model,
                                      const std::vector<NaturalParams>& posterior,
                                      const LocalParams& locals,
                                      const std::vector<Observation>& obs) {
    switch (model.likelihood) {
        case Likelihood::Bernoulli: {
            const auto m = mean_params(posterior[0]);
            double acc = 0.0;
            for (const auto& x : obs) acc += x[0] * m[0] + (1.0 - x[0]) * m[1];
            return acc;
        }
        case Likelihood::Gaussian: {
            const auto m = mean_params(posterior[0]);
            double acc = 0.0;
            for (const auto& x : obs) acc += detail::gaussian_score(x[0], m);
            return acc;
        }
        case Likelihood::GaussianMixture: {
            const int k = model.num_components;
            const int dims = model.obs_dim;
            const auto mw = mean_params(posterior[0]);
            std::vector<std::vector<double>> mc(k * dims);
            for (int b = 0; b < k * dims; ++b) mc[b] = mean_params(posterior[1 + b]);
            if (locals.responsibilities.size() != obs.size()) {
                throw std::invalid_argument("responsibilities do not match observations");
            }
            double acc = 0.0;
            for (size_t n = 0; n < obs.size(); ++n) {
                for (int c = 0; c < k; ++c) {
                    double score = mw[c];
                    for (int d = 0; d < dims; ++d) {
                        score += detail::gaussian_score(obs[n][d], mc[c * dims + d]);
                    }
                    acc += locals.responsibilities[n][c] * score;
                }
            }
            return acc;
        }
        case Likelihood::LinearRegression: {
            const int d = model.num_features;
            std::vector<double> coef_mean(d + 1), coef_var(d + 1);
            for (int j = 0; j <= d; ++j) {
                const auto m = mean_params(posterior[j]);
                coef_mean[j] = m[0];
                coef_var[j] = m[1] - m[0] * m[0];
            }
            const auto mg = mean_params(posterior[d + 1]);  // (E ln gamma, E gamma)
            double acc = 0.0;
            for (const auto& x : obs) {
                const double y = x[d];
                double pred = coef_mean[0];
                double var = coef_var[0];
                for (int i = 1; i <= d; ++i) {
                    pred += coef_mean[i] * x[i - 1];
                    var += coef_var[i] * x[i - 1] * x[i - 1];
                }
                const double sq = (y - pred) * (y - pred) + var;
                acc += 0.5 * mg[0] - kHalfLog2Pi - 0.5 * mg[1] * sq;
            }
            for (int i = 1; i <= d; ++i) {
                const auto m = mean_params(posterior[d + 1 + i]);
                for (const auto& x : obs) acc += detail::gaussian_score(x[i - 1], m);
            }
            return acc;
        }
    }
    throw std::logic_error("unreachable");
}

/// E_q[ln q(z)] = sum of responsibilities' log-probabilities.
inline double local_neg_entropy(const LocalParams& locals) {
    double acc = 0.0;
    for (const auto& phi : locals.responsibilities) {
        for (double p : phi) {
            if (p > 0.0) acc += p * std::log(p);
        }
    }
    return acc;
}

/// Evidence lower bound
///   L = E_q[ln p(x,z|beta)] - sum_b KL(q_b || prior_b) - E_q[ln q(z)].
/// For latent-free conjugate models this equals the exact log evidence
/// at the optimum.
inline double elbo(const ModelSpec& model, const std::vector<NaturalParams>& prior,
                   const std::vector<NaturalParams>& posterior, const LocalParams& locals,
                   const Batch& data) {
    detail::validate_blocks(model, prior, "prior");
    detail::validate_blocks(model, posterior, "posterior");
    double acc = data.train.empty()
                     ? 0.0
                     : expected_log_likelihood(model, posterior, locals, data.train);
    for (size_t b = 0; b < posterior.size(); ++b) {
        acc -= kl_divergence(posterior[b], prior[b]);
    }
    acc -= local_neg_entropy(locals);
    return acc;
}

namespace detail {

// Seeded random initialization of the responsibilities: k random
// observations act as provisional centers and points are soft-assigned
// by distance.  A symmetric init (uniform responsibilities) would start
// the ascent on the saddle between equivalent component labelings.
inline LocalParams init_locals(const ModelSpec& model, const std::vector<Observation>& obs,
                               const FitConfig& cfg) {
    LocalParams locals;
    if (!model.has_local_latents()) return locals;
    const int k = model.num_components;
    const size_t n_obs = obs.size();

    const auto sqdist = [&](size_t a, size_t b) {
        double d = 0.0;
        for (size_t j = 0; j < obs[a].size(); ++j) {
            const double diff = obs[a][j] - obs[b][j];
            d += diff * diff;
        }
        return d;
    };

    // First center seeded at random, the rest by farthest-point
    // selection so no two centers start inside the same bulk of data.
    std::vector<size_t> centers(k);
    centers[0] = std::min(n_obs - 1, static_cast<size_t>(uniform01(cfg.seed, 0xCE17, 0) * n_obs));
    std::vector<double> min_d2(n_obs);
    for (size_t n = 0; n < n_obs; ++n) min_d2[n] = sqdist(n, centers[0]);
    for (int c = 1; c < k; ++c) {
        size_t far = 0;
        for (size_t n = 1; n < n_obs; ++n) {
            if (min_d2[n] > min_d2[far]) far = n;
        }
        centers[c] = far;
        for (size_t n = 0; n < n_obs; ++n) min_d2[n] = std::min(min_d2[n], sqdist(n, far));
    }

    std::vector<std::vector<double>> dist2(n_obs, std::vector<double>(k));
    double typical = 0.0;
    for (size_t n = 0; n < n_obs; ++n) {
        for (int c = 0; c < k; ++c) dist2[n][c] = sqdist(n, centers[c]);
        typical += min_d2[n];
    }
    typical = typical / n_obs + 1e-8;

    locals.responsibilities.resize(n_obs, std::vector<double>(k));
    for (size_t n = 0; n < n_obs; ++n) {
        double sum = 0.0;
        for (int c = 0; c < k; ++c) {
            const double jitter = 0.05 * uniform01(cfg.seed, n, c);
            const double u = std::exp(-dist2[n][c] / (2.0 * typical)) + jitter;
            locals.responsibilities[n][c] = u;
            sum += u;
        }
        for (int c = 0; c < k; ++c) locals.responsibilities[n][c] /= sum;
    }
    return locals;
}

inline void update_locals(const ModelSpec& model, const std::vector<NaturalParams>& posterior,
                          const std::vector<Observation>& obs, LocalParams& locals) {
    if (!model.has_local_latents()) return;
    const int k = model.num_components;
    const int dims = model.obs_dim;
    const auto mw = mean_params(posterior[0]);
    std::vector<std::vector<double>> mc(k * dims);
    for (int b = 0; b < k * dims; ++b) mc[b] = mean_params(posterior[1 + b]);
    std::vector<double> score(k);
    for (size_t n = 0; n < obs.size(); ++n) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            score[c] = mw[c];
            for (int d = 0; d < dims; ++d) score[c] += gaussian_score(obs[n][d], mc[c * dims + d]);
            mx = std::max(mx, score[c]);
        }
        double z = 0.0;
        for (int c = 0; c < k; ++c) z += std::exp(score[c] - mx);  // log-sum-exp
        for (int c = 0; c < k; ++c) locals.responsibilities[n][c] = std::exp(score[c] - mx) / z;
    }
}

inline void update_globals(const ModelSpec& model, const std::vector<NaturalParams>& prior,
                           const std::vector<Observation>& obs, const LocalParams& locals,
                           std::vector<NaturalParams>& posterior) {
    switch (model.likelihood) {
        case Likelihood::Bernoulli: {
            std::vector<double> eta = prior[0].eta;
            for (const auto& x : obs) add_scaled(eta, sufficient_stats(FamilySpec::beta(), x[0]), 1.0);
            posterior[0] = {prior[0].family, std::move(eta)};
            return;
        }
        case Likelihood::Gaussian: {
            std::vector<double> eta = prior[0].eta;
            for (const auto& x : obs) {
                add_scaled(eta, sufficient_stats(FamilySpec::normal_gamma(), x[0]), 1.0);
            }
            posterior[0] = {prior[0].family, std::move(eta)};
            return;
        }
        case Likelihood::GaussianMixture: {
            const int k = model.num_components;
            const int dims = model.obs_dim;
            std::vector<double> weta = prior[0].eta;
            for (size_t n = 0; n < obs.size(); ++n) {
                for (int c = 0; c < k; ++c) weta[c] += locals.responsibilities[n][c];
            }
            posterior[0] = {prior[0].family, std::move(weta)};
            for (int c = 0; c < k; ++c) {
                for (int d = 0; d < dims; ++d) {
                    const int b = 1 + c * dims + d;
                    std::vector<double> eta = prior[b].eta;
                    for (size_t n = 0; n < obs.size(); ++n) {
                        add_scaled(eta, sufficient_stats(FamilySpec::normal_gamma(), obs[n][d]),
                                   locals.responsibilities[n][c]);
                    }
                    posterior[b] = {prior[b].family, std::move(eta)};
                }
            }
            return;
        }
        case Likelihood::LinearRegression: {
            const int d = model.num_features;
            // Coefficients first: their first pass uses the prior mean
            // of the noise precision, which is well-scaled, while the
            // reverse order would start from the flat-prior variances.
            for (int j = 0; j <= d; ++j) {
                const auto mg = mean_params(posterior[d + 1]);
                const double egamma = mg[1];
                double lin = 0.0, quad = 0.0;
                for (const auto& x : obs) {
                    const double xj = (j == 0) ? 1.0 : x[j - 1];
                    double rest = 0.0;
                    for (int kk = 0; kk <= d; ++kk) {
                        if (kk == j) continue;
                        const double xk = (kk == 0) ? 1.0 : x[kk - 1];
                        rest += mean_params(posterior[kk])[0] * xk;
                    }
                    lin += xj * (x[d] - rest);
                    quad += xj * xj;
                }
                posterior[j] = {prior[j].family,
                                {prior[j].eta[0] + egamma * lin,
                                 prior[j].eta[1] - 0.5 * egamma * quad}};
            }
            // Noise precision.
            {
                std::vector<double> coef_mean(d + 1), coef_var(d + 1);
                for (int j = 0; j <= d; ++j) {
                    const auto m = mean_params(posterior[j]);
                    coef_mean[j] = m[0];
                    coef_var[j] = m[1] - m[0] * m[0];
                }
                double sq = 0.0;
                for (const auto& x : obs) {
                    double pred = coef_mean[0];
                    double var = coef_var[0];
                    for (int i = 1; i <= d; ++i) {
                        pred += coef_mean[i] * x[i - 1];
                        var += coef_var[i] * x[i - 1] * x[i - 1];
                    }
                    sq += (x[d] - pred) * (x[d] - pred) + var;
                }
                posterior[d + 1] = {prior[d + 1].family,
                                    {prior[d + 1].eta[0] + 0.5 * obs.size(),
                                     prior[d + 1].eta[1] - 0.5 * sq}};
            }
            // Feature marginals depend only on the data.
            for (int i = 1; i <= d; ++i) {
                const int b = d + 1 + i;
                std::vector<double> eta = prior[b].eta;
                for (const auto& x : obs) {
                    add_scaled(eta, sufficient_stats(FamilySpec::normal_gamma(), x[i - 1]), 1.0);
                }
                posterior[b] = {prior[b].family, std::move(eta)};
            }
            return;
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace detail

/// Fit one batch against the given prior.  warm_start seeds the local
/// responsibilities (used by the outer drift loop); otherwise they are
/// seeded from cfg.seed and the globals take one data-informed update
/// before the sweeps begin.
inline FitResult fit_batch(const ModelSpec& model, const std::vector<NaturalParams>& prior,
                           const Batch& data, const FitConfig& cfg,
                           const LocalParams* warm_start = nullptr) {
    detail::validate_fit_config(cfg);
    detail::validate_blocks(model, prior, "prior");
    if (data.train.empty()) throw std::invalid_argument("fit_batch: empty batch");
    for (const auto& x : data.train) {
        if (static_cast<int>(x.size()) != model.obs_dim) {
            throw std::invalid_argument("observation dimension mismatch");
        }
    }

    FitResult result;
    result.posterior = prior;
    if (model.has_local_latents()) {
        if (warm_start != nullptr) {
            if (warm_start->responsibilities.size() != data.train.size()) {
                throw std::invalid_argument("warm-start locals do not match batch size");
            }
            result.locals = *warm_start;
        } else {
            result.locals = detail::init_locals(model, data.train, cfg);
        }
        detail::update_globals(model, prior, data.train, result.locals, result.posterior);
    }

    double prev = 0.0;
    for (int sweep = 1; sweep <= cfg.max_iterations; ++sweep) {
        detail::update_locals(model, result.posterior, data.train, result.locals);
        detail::update_globals(model, prior, data.train, result.locals, result.posterior);
        const double l = elbo(model, prior, result.posterior, result.locals, data);
        if (!result.elbo_trace.empty()) {
            if (l < prev - (1e-8 + 1e-12 * std::abs(prev))) {
                throw std::logic_error("ELBO decreased during coordinate ascent: " +
                                       std::to_string(prev) + " -> " + std::to_string(l));
            }
            const double rel = (l - prev) / std::max(std::abs(prev), 1e-300);
            if (rel < cfg.relative_tolerance) {
                result.elbo_trace.push_back(l);
                result.converged = true;
                break;
            }
        }
        result.elbo_trace.push_back(l);
        prev = l;
    }
    detail::validate_blocks(model, result.posterior, "posterior");
    return result;
}

}  // namespace driftvb
