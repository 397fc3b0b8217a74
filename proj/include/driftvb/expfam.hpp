#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "driftvb/special_functions.hpp"

namespace driftvb {

// Exponential-family kernel.  Every density here is written as
//   ln p(x | eta) = ln h(x) + eta . t(x) - a(eta)
// and all posterior updates, mixing and KL computations run in the
// natural coordinates eta.  Standard parameterizations exist only at
// the I/O boundary, through the *_natural / *_standard bijections
// below.  Base measures are h == 1 except where noted on the family.
//
// Natural coordinates and sufficient statistics per family:
//   Beta(alpha, beta)          eta = (alpha-1, beta-1)          t(theta) = (ln theta, ln(1-theta))
//   Dirichlet(alpha_1..K)      eta_k = alpha_k - 1              t(w)     = (ln w_1, .., ln w_K)
//   Gamma(shape, rate)         eta = (shape-1, -rate)           t(tau)   = (ln tau, tau)
//   NormalGamma(m, kappa, a, b)
//                              eta = (a - 1/2,
//                                     -(b + kappa m^2 / 2),
//                                     kappa m,
//                                     -kappa / 2)               t(mu,tau) = (ln tau, tau, tau mu, tau mu^2)
//                              h(mu,tau) = 1/sqrt(2 pi)
//   Normal(mean, precision)    eta = (p m, -p/2)                t(mu)    = (mu, mu^2)
//                              h(mu) = 1/sqrt(2 pi)
//   NormalKnownPrecision(tau0) eta = tau0 * mean (scalar)       t(x)     = x
//                              h(x) = sqrt(tau0/(2 pi)) exp(-tau0 x^2 / 2)

enum class Family {
    Beta,
    Dirichlet,
    Gamma,
    NormalGamma,
    Normal,
    NormalKnownPrecision,
};

inline const char* family_name(Family f) {
    switch (f) {
        case Family::Beta: return "Beta";
        case Family::Dirichlet: return "Dirichlet";
        case Family::Gamma: return "Gamma";
        case Family::NormalGamma: return "NormalGamma";
        case Family::Normal: return "Normal";
        case Family::NormalKnownPrecision: return "NormalKnownPrecision";
    }
    return "?";
}

/// Behavioral descriptor of one exponential family: which family, the
/// natural-parameter dimension, and any fixed structural constant.
struct FamilySpec {
    Family family = Family::Beta;
    int dim = 2;
    double known_precision = 1.0;  // NormalKnownPrecision only

    static FamilySpec beta() { return {Family::Beta, 2}; }
    static FamilySpec dirichlet(int k) {
        if (k < 2) throw std::invalid_argument("Dirichlet needs k >= 2, got " + std::to_string(k));
        return {Family::Dirichlet, k};
    }
    static FamilySpec gamma() { return {Family::Gamma, 2}; }
    static FamilySpec normal_gamma() { return {Family::NormalGamma, 4}; }
    static FamilySpec normal() { return {Family::Normal, 2}; }
    static FamilySpec normal_known_precision(double tau0 = 1.0) {
        if (!(tau0 > 0.0)) throw std::invalid_argument("known precision must be positive");
        return {Family::NormalKnownPrecision, 1, tau0};
    }

    bool operator==(const FamilySpec& o) const {
        return family == o.family && dim == o.dim &&
               (family != Family::NormalKnownPrecision || known_precision == o.known_precision);
    }
};

/// Natural-parameter vector of one exponential-family block.
struct NaturalParams {
    FamilySpec family;
    std::vector<double> eta;

    NaturalParams() = default;
    NaturalParams(FamilySpec f, std::vector<double> e) : family(f), eta(std::move(e)) {
        if (static_cast<int>(eta.size()) != family.dim) {
            throw std::invalid_argument(std::string(family_name(family.family)) +
                                        ": natural parameter length " + std::to_string(eta.size()) +
                                        " does not match family dim " + std::to_string(family.dim));
        }
    }
};

namespace detail {

[[noreturn]] inline void domain_error(const NaturalParams& p, int component,
                                      const std::string& constraint) {
    throw std::invalid_argument(std::string(family_name(p.family.family)) +
                                ": natural parameter component " + std::to_string(component) +
                                " violates " + constraint + " (eta[" + std::to_string(component) +
                                "] = " + std::to_string(p.eta[component]) + ")");
}

}  // namespace detail

/// True when eta lies in the family's open natural domain.
inline bool in_domain(const NaturalParams& p) {
    const auto& e = p.eta;
    for (double v : e) {
        if (!std::isfinite(v)) return false;
    }
    switch (p.family.family) {
        case Family::Beta:
        case Family::Dirichlet:
            for (double v : e) {
                if (!(v > -1.0)) return false;
            }
            return true;
        case Family::Gamma:
            return e[0] > -1.0 && e[1] < 0.0;
        case Family::NormalGamma: {
            if (!(e[0] > -0.5) || !(e[3] < 0.0)) return false;
            const double kappa = -2.0 * e[3];
            const double b = -e[1] - e[2] * e[2] / (2.0 * kappa);
            return b > 0.0;
        }
        case Family::Normal:
            return e[1] < 0.0;
        case Family::NormalKnownPrecision:
            return true;
    }
    return false;
}

/// Domain check that names the offending component.  Domain violations
/// are hard errors throughout; nothing is silently clamped.
inline void check_domain(const NaturalParams& p) {
    const auto& e = p.eta;
    for (int i = 0; i < static_cast<int>(e.size()); ++i) {
        if (!std::isfinite(e[i])) detail::domain_error(p, i, "finiteness");
    }
    switch (p.family.family) {
        case Family::Beta:
        case Family::Dirichlet:
            for (int i = 0; i < static_cast<int>(e.size()); ++i) {
                if (!(e[i] > -1.0)) detail::domain_error(p, i, "eta > -1");
            }
            return;
        case Family::Gamma:
            if (!(e[0] > -1.0)) detail::domain_error(p, 0, "eta > -1 (shape > 0)");
            if (!(e[1] < 0.0)) detail::domain_error(p, 1, "eta < 0 (rate > 0)");
            return;
        case Family::NormalGamma: {
            if (!(e[0] > -0.5)) detail::domain_error(p, 0, "eta > -1/2 (shape > 0)");
            if (!(e[3] < 0.0)) detail::domain_error(p, 3, "eta < 0 (kappa > 0)");
            const double kappa = -2.0 * e[3];
            const double b = -e[1] - e[2] * e[2] / (2.0 * kappa);
            if (!(b > 0.0)) detail::domain_error(p, 1, "implied rate b > 0");
            return;
        }
        case Family::Normal:
            if (!(e[1] < 0.0)) detail::domain_error(p, 1, "eta < 0 (precision > 0)");
            return;
        case Family::NormalKnownPrecision:
            return;
    }
}

inline void check_same_family(const NaturalParams& a, const NaturalParams& b,
                              const char* where) {
    if (!(a.family == b.family)) {
        throw std::invalid_argument(std::string(where) + ": family mismatch (" +
                                    family_name(a.family.family) + " vs " +
                                    family_name(b.family.family) + ")");
    }
}

/// Log-normalizer a(eta), exact closed form per family.
inline double log_normalizer(const NaturalParams& p) {
    check_domain(p);
    const auto& e = p.eta;
    switch (p.family.family) {
        case Family::Beta:
            return log_beta(e[0] + 1.0, e[1] + 1.0);
        case Family::Dirichlet: {
            double sum = 0.0, acc = 0.0;
            for (double v : e) {
                acc += log_gamma(v + 1.0);
                sum += v + 1.0;
            }
            return acc - log_gamma(sum);
        }
        case Family::Gamma: {
            const double shape = e[0] + 1.0;
            const double rate = -e[1];
            return log_gamma(shape) - shape * std::log(rate);
        }
        case Family::NormalGamma: {
            const double a = e[0] + 0.5;
            const double kappa = -2.0 * e[3];
            const double b = -e[1] - e[2] * e[2] / (2.0 * kappa);
            return log_gamma(a) - a * std::log(b) - 0.5 * std::log(kappa);
        }
        case Family::Normal: {
            const double prec = -2.0 * e[1];
            return e[0] * e[0] / (2.0 * prec) - 0.5 * std::log(prec);
        }
        case Family::NormalKnownPrecision:
            return e[0] * e[0] / (2.0 * p.family.known_precision);
    }
    throw std::logic_error("unreachable");
}

/// Mean parameters grad a(eta) = E[t(X)].
inline std::vector<double> mean_params(const NaturalParams& p) {
    check_domain(p);
    const auto& e = p.eta;
    switch (p.family.family) {
        case Family::Beta: {
            const double a = e[0] + 1.0, b = e[1] + 1.0;
            const double dab = digamma(a + b);
            return {digamma(a) - dab, digamma(b) - dab};
        }
        case Family::Dirichlet: {
            double sum = 0.0;
            for (double v : e) sum += v + 1.0;
            const double dsum = digamma(sum);
            std::vector<double> m(e.size());
            for (size_t i = 0; i < e.size(); ++i) m[i] = digamma(e[i] + 1.0) - dsum;
            return m;
        }
        case Family::Gamma: {
            const double shape = e[0] + 1.0;
            const double rate = -e[1];
            return {digamma(shape) - std::log(rate), shape / rate};
        }
        case Family::NormalGamma: {
            const double a = e[0] + 0.5;
            const double kappa = -2.0 * e[3];
            const double m = e[2] / kappa;
            const double b = -e[1] - kappa * m * m / 2.0;
            const double etau = a / b;
            return {digamma(a) - std::log(b), etau, m * etau, 1.0 / kappa + m * m * etau};
        }
        case Family::Normal: {
            const double prec = -2.0 * e[1];
            const double m = e[0] / prec;
            return {m, m * m + 1.0 / prec};
        }
        case Family::NormalKnownPrecision:
            return {e[0] / p.family.known_precision};
    }
    throw std::logic_error("unreachable");
}

/// KL(q || p) in closed form through the log-normalizer and its gradient:
/// a(eta_p) - a(eta_q) - (eta_p - eta_q) . grad a(eta_q).
/// Valid because both densities share the family's base measure.
inline double kl_divergence(const NaturalParams& q, const NaturalParams& p) {
    check_same_family(q, p, "kl_divergence");
    const std::vector<double> mq = mean_params(q);
    double acc = log_normalizer(p) - log_normalizer(q);
    for (size_t i = 0; i < mq.size(); ++i) acc -= (p.eta[i] - q.eta[i]) * mq[i];
    return acc;
}

/// Conjugate-update increment t(x) for one observation under the
/// family's canonical likelihood pairing (pseudo-count coordinates):
///   Beta        <- Bernoulli outcome y in {0,1}:      (y, 1-y)
///   Dirichlet   <- categorical index i:               one-hot(i)
///   Gamma       <- precision of a zero-mean Gaussian: (1/2, -x^2/2)
///   NormalGamma <- Gaussian observation x:            (1/2, -x^2/2, x, -1/2)
///   Normal      <- unit-precision Gaussian obs x:     (x, -1/2)
///   NormalKnownPrecision <- Gaussian obs x:           (tau0 * x)
inline std::vector<double> sufficient_stats(const FamilySpec& f, double x) {
    switch (f.family) {
        case Family::Beta:
            if (x != 0.0 && x != 1.0) {
                throw std::invalid_argument("Beta/Bernoulli outcome must be 0 or 1, got " +
                                            std::to_string(x));
            }
            return {x, 1.0 - x};
        case Family::Dirichlet: {
            const int i = static_cast<int>(x);
            if (static_cast<double>(i) != x || i < 0 || i >= f.dim) {
                throw std::invalid_argument("categorical index out of range: " + std::to_string(x));
            }
            std::vector<double> t(f.dim, 0.0);
            t[i] = 1.0;
            return t;
        }
        case Family::Gamma:
            if (!std::isfinite(x)) throw std::invalid_argument("non-finite observation");
            return {0.5, -x * x / 2.0};
        case Family::NormalGamma:
            if (!std::isfinite(x)) throw std::invalid_argument("non-finite observation");
            return {0.5, -x * x / 2.0, x, -0.5};
        case Family::Normal:
            if (!std::isfinite(x)) throw std::invalid_argument("non-finite observation");
            return {x, -0.5};
        case Family::NormalKnownPrecision:
            if (!std::isfinite(x)) throw std::invalid_argument("non-finite observation");
            return {f.known_precision * x};
    }
    throw std::logic_error("unreachable");
}

// ---- standard <-> natural bijections (I/O boundary) ----

inline NaturalParams beta_natural(double alpha, double beta) {
    if (!(alpha > 0.0) || !(beta > 0.0)) {
        throw std::invalid_argument("Beta requires alpha > 0 and beta > 0, got (" +
                                    std::to_string(alpha) + ", " + std::to_string(beta) + ")");
    }
    return {FamilySpec::beta(), {alpha - 1.0, beta - 1.0}};
}

inline NaturalParams dirichlet_natural(const std::vector<double>& alpha) {
    std::vector<double> eta(alpha.size());
    for (size_t i = 0; i < alpha.size(); ++i) {
        if (!(alpha[i] > 0.0)) {
            throw std::invalid_argument("Dirichlet concentration " + std::to_string(i) +
                                        " must be positive");
        }
        eta[i] = alpha[i] - 1.0;
    }
    return {FamilySpec::dirichlet(static_cast<int>(alpha.size())), std::move(eta)};
}

inline NaturalParams gamma_natural(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0)) {
        throw std::invalid_argument("Gamma requires shape > 0 and rate > 0");
    }
    return {FamilySpec::gamma(), {shape - 1.0, -rate}};
}

inline NaturalParams normal_gamma_natural(double mean, double kappa, double shape, double rate) {
    if (!(kappa > 0.0) || !(shape > 0.0) || !(rate > 0.0)) {
        throw std::invalid_argument("NormalGamma requires kappa, shape, rate > 0");
    }
    return {FamilySpec::normal_gamma(),
            {shape - 0.5, -(rate + kappa * mean * mean / 2.0), kappa * mean, -kappa / 2.0}};
}

inline NaturalParams normal_natural(double mean, double precision) {
    if (!(precision > 0.0)) throw std::invalid_argument("Normal requires precision > 0");
    return {FamilySpec::normal(), {precision * mean, -precision / 2.0}};
}

struct BetaStandard {
    double alpha, beta;
};
inline BetaStandard beta_standard(const NaturalParams& p) {
    check_domain(p);
    return {p.eta[0] + 1.0, p.eta[1] + 1.0};
}

inline std::vector<double> dirichlet_standard(const NaturalParams& p) {
    check_domain(p);
    std::vector<double> alpha(p.eta.size());
    for (size_t i = 0; i < alpha.size(); ++i) alpha[i] = p.eta[i] + 1.0;
    return alpha;
}

struct GammaStandard {
    double shape, rate;
};
inline GammaStandard gamma_standard(const NaturalParams& p) {
    check_domain(p);
    return {p.eta[0] + 1.0, -p.eta[1]};
}

struct NormalGammaStandard {
    double mean, kappa, shape, rate;
};
inline NormalGammaStandard normal_gamma_standard(const NaturalParams& p) {
    check_domain(p);
    const double kappa = -2.0 * p.eta[3];
    const double mean = p.eta[2] / kappa;
    return {mean, kappa, p.eta[0] + 0.5, -p.eta[1] - kappa * mean * mean / 2.0};
}

struct NormalStandard {
    double mean, precision;
};
inline NormalStandard normal_standard(const NaturalParams& p) {
    check_domain(p);
    const double prec = -2.0 * p.eta[1];
    return {p.eta[0] / prec, prec};
}

}  // namespace driftvb
