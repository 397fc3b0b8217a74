#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "driftvb/expfam.hpp"

namespace driftvb {

// Concrete conjugate models, each expressed as a list of global
// parameter blocks plus an observation model.  Blocks carry their
// uninformative prior; "flat" Gaussian priors are realized as proper
// Gaussians with precision 1e-10 so every bound and KL stays defined.

enum class Likelihood {
    Bernoulli,         // Beta block, 0/1 observations
    Gaussian,          // single NormalGamma block, scalar observations
    GaussianMixture,   // Dirichlet weights + per-component NormalGamma blocks
    LinearRegression,  // Normal coefficient blocks + Gamma noise + NormalGamma marginals
};

inline constexpr double kFlatPrecision = 1e-10;

struct BlockSpec {
    std::string name;
    NaturalParams prior;
};

struct ModelSpec {
    Likelihood likelihood = Likelihood::Bernoulli;
    std::vector<BlockSpec> blocks;
    int num_components = 0;  // mixtures only; arity of the local latent
    int obs_dim = 1;         // length of each observation vector
    int num_features = 0;    // regression only

    bool has_local_latents() const { return likelihood == Likelihood::GaussianMixture; }

    int block_index(const std::string& name) const {
        for (size_t i = 0; i < blocks.size(); ++i) {
            if (blocks[i].name == name) return static_cast<int>(i);
        }
        throw std::invalid_argument("no block named '" + name + "'");
    }

    std::vector<NaturalParams> priors() const {
        std::vector<NaturalParams> out;
        out.reserve(blocks.size());
        for (const auto& b : blocks) out.push_back(b.prior);
        return out;
    }
};

/// Per-observation responsibilities over mixture components; empty for
/// models without local latents.
struct LocalParams {
    std::vector<std::vector<double>> responsibilities;  // [n][component]
};

/// Beta-Binomial model: one Beta block over the success probability.
inline ModelSpec make_beta_binomial(double prior_alpha, double prior_beta) {
    ModelSpec m;
    m.likelihood = Likelihood::Bernoulli;
    m.blocks.push_back({"p", beta_natural(prior_alpha, prior_beta)});
    return m;
}

/// Scalar Gaussian with a NormalGamma(mean 0, kappa 1e-10, shape 1,
/// rate 1) prior: flat over the mean, unit-scale Gamma over precision.
inline ModelSpec make_gaussian_model() {
    ModelSpec m;
    m.likelihood = Likelihood::Gaussian;
    m.blocks.push_back({"mu_tau", normal_gamma_natural(0.0, kFlatPrecision, 1.0, 1.0)});
    return m;
}

/// Mixture of Gaussians: uniform Dirichlet weights over k components
/// plus one NormalGamma block per component and observation dimension.
inline ModelSpec make_mixture_model(int k, int dims) {
    if (k < 2) throw std::invalid_argument("mixture needs k >= 2 components, got " + std::to_string(k));
    if (dims < 1) throw std::invalid_argument("mixture needs dims >= 1");
    ModelSpec m;
    m.likelihood = Likelihood::GaussianMixture;
    m.num_components = k;
    m.obs_dim = dims;
    m.blocks.push_back({"weights", dirichlet_natural(std::vector<double>(k, 1.0))});
    for (int c = 0; c < k; ++c) {
        for (int d = 0; d < dims; ++d) {
            m.blocks.push_back({"comp" + std::to_string(c) + "_dim" + std::to_string(d),
                                normal_gamma_natural(0.0, kFlatPrecision, 1.0, 1.0)});
        }
    }
    return m;
}

/// Bayesian linear regression: y ~ N(b0 + sum_i b_i x_i, noise), flat
/// Normal priors on the coefficients, Gamma(1,1) on the noise
/// precision, NormalGamma marginals for each feature.  Observations
/// are (x_1 .. x_d, y).
inline ModelSpec make_linear_regression(int num_features) {
    if (num_features < 1) throw std::invalid_argument("regression needs num_features >= 1");
    ModelSpec m;
    m.likelihood = Likelihood::LinearRegression;
    m.num_features = num_features;
    m.obs_dim = num_features + 1;
    for (int j = 0; j <= num_features; ++j) {
        m.blocks.push_back({"b" + std::to_string(j), normal_natural(0.0, kFlatPrecision)});
    }
    m.blocks.push_back({"noise", gamma_natural(1.0, 1.0)});
    for (int i = 1; i <= num_features; ++i) {
        m.blocks.push_back({"x" + std::to_string(i),
                            normal_gamma_natural(0.0, kFlatPrecision, 1.0, 1.0)});
    }
    return m;
}

}  // namespace driftvb
