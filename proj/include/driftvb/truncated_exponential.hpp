#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace driftvb {

// Truncated exponential distribution on [0,1]:
//   q(rho | omega) = exp(omega * rho) / Z(omega),   Z = (e^omega - 1) / omega.
// omega may take either sign; omega > 0 concentrates mass near rho = 1
// (retain history), omega < 0 near rho = 0 (forget).  The prior over rho
// uses natural parameter +gamma under the same convention, so the
// drift-neutral prior pulls slightly toward retention; the fixed point
// of the omega update below is invariant to this sign choice and is
// verified against a finite-difference gradient in the tests.

/// Log-normalizer ln((e^omega - 1) / omega), with a series fallback at
/// the removable singularity omega = 0.
inline double trunc_exp_log_normalizer(double omega) {
    if (!std::isfinite(omega)) {
        throw std::invalid_argument("trunc_exp_log_normalizer: omega must be finite");
    }
    const double w = std::abs(omega);
    if (w < 1e-4) {
        // ln((e^w - 1)/w) = w/2 + w^2/24 - w^4/2880 + ...
        const double base = omega / 2.0 + omega * omega / 24.0;
        return base;
    }
    // For w > 0: ln(e^w - 1) - ln w = w + ln(1 - e^-w) - ln w, overflow-free.
    const double pos = w + std::log1p(-std::exp(-w)) - std::log(w);
    // a(-w) = a(w) - w.
    return omega > 0.0 ? pos : pos - w;
}

/// E[rho] = 1/(1 - e^-omega) - 1/omega, the gradient of the
/// log-normalizer.  Strictly increasing in omega, equal to 1/2 at 0.
inline double trunc_exp_mean(double omega) {
    if (!std::isfinite(omega)) {
        throw std::invalid_argument("trunc_exp_mean: omega must be finite");
    }
    if (std::abs(omega) < 1e-4) {
        return 0.5 + omega / 12.0 - omega * omega * omega / 720.0;
    }
    if (omega > 0.0) {
        return 1.0 / (1.0 - std::exp(-omega)) - 1.0 / omega;
    }
    // Mirror through E[rho](-w) = 1 - E[rho](w) to avoid cancellation.
    const double w = -omega;
    return 1.0 - (1.0 / (1.0 - std::exp(-w)) - 1.0 / w);
}

/// Var[rho] = 1/omega^2 - 1/(2 sinh(omega/2))^2, the Hessian of the
/// log-normalizer (Fisher information of q(rho | omega)).
inline double trunc_exp_variance(double omega) {
    if (!std::isfinite(omega)) {
        throw std::invalid_argument("trunc_exp_variance: omega must be finite");
    }
    const double w = std::abs(omega);
    if (w < 1e-3) {
        return 1.0 / 12.0 - omega * omega / 240.0;
    }
    if (w > 700.0) {
        return 1.0 / (w * w);
    }
    const double s = 2.0 * std::sinh(w / 2.0);
    return 1.0 / (w * w) - 1.0 / (s * s);
}

/// Variational posterior q(rho | omega) with its prior rate gamma.
struct TruncExp {
    double omega = 0.0;
    double gamma = 0.1;

    double expected_rho() const { return trunc_exp_mean(omega); }

    /// E_q[ln q(rho | omega)] (negative entropy).
    double expected_log_q() const {
        return omega * trunc_exp_mean(omega) - trunc_exp_log_normalizer(omega);
    }

    /// E_q[ln p(rho | gamma)] under the natural-parameter-gamma prior.
    double expected_log_prior() const {
        return gamma * trunc_exp_mean(omega) - trunc_exp_log_normalizer(gamma);
    }
};

inline double expected_rho(const TruncExp& s) { return s.expected_rho(); }

/// Coordinate update for omega: the natural gradient of the double
/// bound vanishes exactly at
///   omega* = KL(q(beta|lambda_t), p_u) - KL(q(beta|lambda_t), p_delta) + gamma.
inline double update_omega(double kl_to_uninformative, double kl_to_delta, double gamma) {
    if (!std::isfinite(kl_to_uninformative) || !std::isfinite(kl_to_delta) ||
        !std::isfinite(gamma)) {
        throw std::invalid_argument("update_omega: inputs must be finite");
    }
    if (kl_to_uninformative < 0.0 || kl_to_delta < 0.0) {
        throw std::invalid_argument("update_omega: KL divergences must be non-negative");
    }
    return kl_to_uninformative - kl_to_delta + gamma;
}

}  // namespace driftvb
