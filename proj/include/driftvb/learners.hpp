#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "driftvb/drift.hpp"
#include "driftvb/engine.hpp"
#include "driftvb/metrics.hpp"
#include "driftvb/models.hpp"
#include "driftvb/streams.hpp"

namespace driftvb {

// The five streaming learners behind one batch-update interface.  A
// step is transactional: it either returns the next state or throws,
// leaving the caller's state untouched (states are plain values).

enum class LearnerKind { Svb, SvbPp, Pvb, SvbHpp, SvbMhpp };

inline const char* learner_kind_name(LearnerKind k) {
    switch (k) {
        case LearnerKind::Svb: return "svb";
        case LearnerKind::SvbPp: return "svb_pp";
        case LearnerKind::Pvb: return "pvb";
        case LearnerKind::SvbHpp: return "svb_hpp";
        case LearnerKind::SvbMhpp: return "svb_mhpp";
    }
    return "?";
}

inline LearnerKind learner_kind_from_name(const std::string& s) {
    if (s == "svb") return LearnerKind::Svb;
    if (s == "svb_pp") return LearnerKind::SvbPp;
    if (s == "pvb") return LearnerKind::Pvb;
    if (s == "svb_hpp") return LearnerKind::SvbHpp;
    if (s == "svb_mhpp") return LearnerKind::SvbMhpp;
    throw std::invalid_argument("unknown learner kind '" + s + "'");
}

struct LearnerConfig {
    LearnerKind kind = LearnerKind::Svb;
    std::optional<double> rho;            // SVB-PP only, in (0,1]
    std::optional<int> population_size;   // PVB only, M >= 1
    std::optional<double> learning_rate;  // PVB only, nu in (0,1]
    std::optional<double> gamma;          // HPP kinds only, default 0.1
    FitConfig fit;
};

struct LearnerState {
    std::vector<NaturalParams> posterior;  // lambda_t
    std::optional<DriftState> drift;
    int step = 0;
};

/// Per-step report: the bound reached, per-block ESS, E[rho] for the
/// adaptive kinds, held-out TMLL when test data exists, and the
/// posterior first-moment summary.
struct StepReport {
    int t = 0;
    double elbo = 0.0;
    std::vector<double> ess;
    std::vector<double> expected_rho;
    std::optional<double> tmll;
    std::vector<double> summary;
    bool converged = false;
};

/// Validate the config for its kind; irrelevant fields are rejected so
/// a mistyped experiment matrix fails loudly.
inline void validate_learner_config(const LearnerConfig& cfg) {
    detail::validate_fit_config(cfg.fit);
    const bool is_pp = cfg.kind == LearnerKind::SvbPp;
    const bool is_pvb = cfg.kind == LearnerKind::Pvb;
    const bool is_hpp = cfg.kind == LearnerKind::SvbHpp || cfg.kind == LearnerKind::SvbMhpp;

    if (is_pp) {
        if (!cfg.rho) throw std::invalid_argument("svb_pp requires rho");
        if (!(*cfg.rho > 0.0 && *cfg.rho <= 1.0)) {
            throw std::invalid_argument("svb_pp rho must lie in (0,1]");
        }
    } else if (cfg.rho) {
        throw std::invalid_argument(std::string(learner_kind_name(cfg.kind)) +
                                    " does not take rho");
    }

    if (is_pvb) {
        if (!cfg.population_size || !cfg.learning_rate) {
            throw std::invalid_argument("pvb requires population_size and learning_rate");
        }
        if (*cfg.population_size < 1) throw std::invalid_argument("population_size must be >= 1");
        if (!(*cfg.learning_rate > 0.0 && *cfg.learning_rate <= 1.0)) {
            throw std::invalid_argument("learning_rate must lie in (0,1]");
        }
    } else if (cfg.population_size || cfg.learning_rate) {
        throw std::invalid_argument(std::string(learner_kind_name(cfg.kind)) +
                                    " does not take population_size/learning_rate");
    }

    if (!is_hpp && cfg.gamma) {
        throw std::invalid_argument(std::string(learner_kind_name(cfg.kind)) +
                                    " does not take gamma");
    }
}

inline LearnerState learner_init(const ModelSpec& model, const LearnerConfig& cfg) {
    validate_learner_config(cfg);
    LearnerState s;
    s.posterior = model.priors();
    if (cfg.kind == LearnerKind::SvbHpp || cfg.kind == LearnerKind::SvbMhpp) {
        s.drift = make_drift_state(model, cfg.kind == LearnerKind::SvbMhpp,
                                   cfg.gamma.value_or(0.1));
    }
    return s;
}

namespace detail {

// Expected sufficient-statistics sums per block with locals held at the
// given posterior (the PVB gradient's data term).
inline std::vector<std::vector<double>> expected_stat_sums(
    const ModelSpec& model, const std::vector<NaturalParams>& at,
    const std::vector<Observation>& obs) {
    std::vector<std::vector<double>> sums(model.blocks.size());
    for (size_t b = 0; b < sums.size(); ++b) sums[b].assign(model.blocks[b].prior.eta.size(), 0.0);
    switch (model.likelihood) {
        case Likelihood::Bernoulli:
            for (const auto& x : obs) {
                add_scaled(sums[0], sufficient_stats(FamilySpec::beta(), x[0]), 1.0);
            }
            return sums;
        case Likelihood::Gaussian:
            for (const auto& x : obs) {
                add_scaled(sums[0], sufficient_stats(FamilySpec::normal_gamma(), x[0]), 1.0);
            }
            return sums;
        case Likelihood::GaussianMixture: {
            LocalParams locals;
            locals.responsibilities.assign(obs.size(),
                                           std::vector<double>(model.num_components, 0.0));
            update_locals(model, at, obs, locals);
            const int k = model.num_components;
            const int dims = model.obs_dim;
            for (size_t n = 0; n < obs.size(); ++n) {
                for (int c = 0; c < k; ++c) sums[0][c] += locals.responsibilities[n][c];
            }
            for (int c = 0; c < k; ++c) {
                for (int d = 0; d < dims; ++d) {
                    for (size_t n = 0; n < obs.size(); ++n) {
                        add_scaled(sums[1 + c * dims + d],
                                   sufficient_stats(FamilySpec::normal_gamma(), obs[n][d]),
                                   locals.responsibilities[n][c]);
                    }
                }
            }
            return sums;
        }
        case Likelihood::LinearRegression:
            // The joint model is outside the conditional-conjugate
            // family, so the population gradient has no closed form.
            throw std::invalid_argument(
                "pvb: unsupported model (linear regression has no closed-form "
                "population gradient)");
    }
    throw std::logic_error("unreachable");
}

}  // namespace detail

inline std::pair<LearnerState, StepReport> learner_step(const ModelSpec& model,
                                                        const LearnerConfig& cfg,
                                                        const LearnerState& state,
                                                        const Batch& data) {
    validate_learner_config(cfg);
    LearnerState next = state;
    next.step = state.step + 1;
    StepReport report;
    report.t = data.t;

    switch (cfg.kind) {
        case LearnerKind::Svb: {
            const FitResult fit = fit_batch(model, state.posterior, data, cfg.fit);
            report.elbo = fit.elbo_trace.back();
            report.converged = fit.converged;
            next.posterior = fit.posterior;
            break;
        }
        case LearnerKind::SvbPp: {
            std::vector<NaturalParams> prior(model.blocks.size());
            for (size_t b = 0; b < prior.size(); ++b) {
                prior[b] =
                    power_prior_combine(state.posterior[b], model.blocks[b].prior, *cfg.rho);
            }
            const FitResult fit = fit_batch(model, prior, data, cfg.fit);
            report.elbo = fit.elbo_trace.back();
            report.converged = fit.converged;
            next.posterior = fit.posterior;
            break;
        }
        case LearnerKind::Pvb: {
            if (data.train.empty()) throw std::invalid_argument("learner_step: empty batch");
            const double nu = *cfg.learning_rate;
            const double scale =
                static_cast<double>(*cfg.population_size) / data.train.size();
            const auto sums = detail::expected_stat_sums(model, state.posterior, data.train);
            next.posterior = state.posterior;
            for (size_t b = 0; b < next.posterior.size(); ++b) {
                std::vector<double> eta(next.posterior[b].eta.size());
                for (size_t i = 0; i < eta.size(); ++i) {
                    eta[i] = (1.0 - nu) * state.posterior[b].eta[i] +
                             nu * (model.blocks[b].prior.eta[i] + scale * sums[b][i]);
                }
                next.posterior[b] = {next.posterior[b].family, std::move(eta)};
                check_domain(next.posterior[b]);
            }
            // Report the bound at the stepped posterior.
            LocalParams locals;
            if (model.has_local_latents()) {
                locals.responsibilities.assign(data.train.size(),
                                               std::vector<double>(model.num_components, 0.0));
                detail::update_locals(model, next.posterior, data.train, locals);
            }
            report.elbo = elbo(model, model.priors(), next.posterior, locals, data);
            report.converged = true;
            break;
        }
        case LearnerKind::SvbHpp:
        case LearnerKind::SvbMhpp: {
            const HppResult res =
                hpp_fit_batch(model, state.posterior, *state.drift, data, cfg.fit);
            report.elbo = res.bound;
            report.converged = res.fit.converged;
            next.posterior = res.fit.posterior;
            next.drift = res.state;
            for (size_t r = 0; r < res.state.rho.size(); ++r) {
                report.expected_rho.push_back(res.state.expected_rho_for_block(r));
            }
            break;
        }
    }

    for (const auto& block : next.posterior) {
        if (block.family.family != Family::NormalKnownPrecision) {
            report.ess.push_back(ess(block));
        }
    }
    report.summary = posterior_summary(next.posterior);
    if (!data.test.empty()) {
        report.tmll = tmll(model, next.posterior, data.test,
                           cfg.fit.seed ^ static_cast<std::uint64_t>(data.t));
    }
    return {std::move(next), std::move(report)};
}

}  // namespace driftvb
