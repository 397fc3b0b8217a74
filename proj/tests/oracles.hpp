#pragma once

// Independent numerical oracles used by the test suites: quadrature,
// finite differences and simple reference estimators.  Everything here
// is deliberately written without touching the library's closed forms,
// so oracle and implementation can only agree by both being right.

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracles {

// Gauss-Legendre nodes/weights on [-1,1], computed by Newton iteration
// on the Legendre polynomial.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double z1 = z;
            z = z1 - p0 / pp;
            if (std::abs(z - z1) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
}

/// Integral of f over [a,b] with an n-point Gauss-Legendre rule.
inline double integrate(const std::function<double(double)>& f, double a, double b, int n = 64) {
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    const double mid = (a + b) / 2.0, half = (b - a) / 2.0;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += w[i] * f(mid + half * x[i]);
    return acc * half;
}

/// Composite rule: [a,b] split into m panels of n points each.
inline double integrate_composite(const std::function<double(double)>& f, double a, double b,
                                  int panels = 16, int n = 32) {
    double acc = 0.0;
    const double step = (b - a) / panels;
    for (int k = 0; k < panels; ++k) {
        acc += integrate(f, a + k * step, a + (k + 1) * step, n);
    }
    return acc;
}

/// 2-D tensor rule over [ax,bx] x [ay,by].
inline double integrate2d(const std::function<double(double, double)>& f, double ax, double bx,
                          double ay, double by, int n = 96) {
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    const double mx = (ax + bx) / 2.0, hx = (bx - ax) / 2.0;
    const double my = (ay + by) / 2.0, hy = (by - ay) / 2.0;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        double inner = 0.0;
        const double xi = mx + hx * x[i];
        for (int j = 0; j < n; ++j) inner += w[j] * f(xi, my + hy * x[j]);
        acc += w[i] * inner;
    }
    return acc * hx * hy;
}

/// Central finite difference of a scalar function of a vector argument.
inline std::vector<double> finite_diff_gradient(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> at,
    double h = 1e-5) {
    std::vector<double> g(at.size());
    for (size_t i = 0; i < at.size(); ++i) {
        const double step = h * std::max(1.0, std::abs(at[i]));
        const double orig = at[i];
        at[i] = orig + step;
        const double fp = f(at);
        at[i] = orig - step;
        const double fm = f(at);
        at[i] = orig;
        g[i] = (fp - fm) / (2.0 * step);
    }
    return g;
}

inline double finite_diff_scalar(const std::function<double(double)>& f, double at,
                                 double h = 1e-5) {
    const double step = h * std::max(1.0, std::abs(at));
    return (f(at + step) - f(at - step)) / (2.0 * step);
}

// Reference densities in standard parameterizations (log scale).
inline double log_beta_pdf(double x, double a, double b) {
    return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - std::lgamma(a) -
           std::lgamma(b) + std::lgamma(a + b);
}

inline double log_gamma_pdf(double x, double shape, double rate) {
    return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

inline double log_dirichlet3_pdf(double x1, double x2, const std::vector<double>& a) {
    const double x3 = 1.0 - x1 - x2;
    double acc = std::lgamma(a[0] + a[1] + a[2]) - std::lgamma(a[0]) - std::lgamma(a[1]) -
                 std::lgamma(a[2]);
    return acc + (a[0] - 1.0) * std::log(x1) + (a[1] - 1.0) * std::log(x2) +
           (a[2] - 1.0) * std::log(x3);
}

inline double log_normal_pdf(double x, double mean, double precision) {
    return 0.5 * std::log(precision) - 0.5 * std::log(2.0 * M_PI) -
           0.5 * precision * (x - mean) * (x - mean);
}

// NormalGamma(mean m, scale kappa, shape a, rate b) over (mu, tau).
inline double log_normal_gamma_pdf(double mu, double tau, double m, double kappa, double a,
                                   double b) {
    return log_gamma_pdf(tau, a, b) + log_normal_pdf(mu, m, kappa * tau);
}

/// KL between two Beta densities by quadrature.
inline double kl_beta_quadrature(double a1, double b1, double a2, double b2) {
    return integrate_composite(
        [&](double x) {
            const double lq = log_beta_pdf(x, a1, b1);
            return std::exp(lq) * (lq - log_beta_pdf(x, a2, b2));
        },
        1e-12, 1.0 - 1e-12, 24, 48);
}

/// KL between two Gamma densities by quadrature.
inline double kl_gamma_quadrature(double s1, double r1, double s2, double r2) {
    const double hi = (s1 + 14.0 * std::sqrt(s1)) / r1;
    return integrate_composite(
        [&](double x) {
            const double lq = log_gamma_pdf(x, s1, r1);
            return std::exp(lq) * (lq - log_gamma_pdf(x, s2, r2));
        },
        1e-12, hi, 24, 48);
}

/// KL between two 3-component Dirichlet densities by nested quadrature
/// over the simplex.
inline double kl_dirichlet3_quadrature(const std::vector<double>& a1,
                                       const std::vector<double>& a2) {
    const double eps = 1e-10;
    return integrate_composite(
        [&](double x1) {
            return integrate_composite(
                [&](double x2) {
                    const double lq = log_dirichlet3_pdf(x1, x2, a1);
                    return std::exp(lq) * (lq - log_dirichlet3_pdf(x1, x2, a2));
                },
                eps, 1.0 - x1 - eps, 8, 32);
        },
        eps, 1.0 - 2.0 * eps, 8, 32);
}

/// KL between two NormalGamma densities by 2-D quadrature.  The mu
/// coordinate is standardized per tau (u = (mu - m1) sqrt(k1 tau)) so
/// the integrand is not a funnel; the u integral is then against a
/// fixed standard normal weight.
inline double kl_normal_gamma_quadrature(double m1, double k1, double a1, double b1, double m2,
                                         double k2, double a2, double b2) {
    const double tau_hi = (a1 + 16.0 * std::sqrt(a1)) / b1;
    return integrate_composite(
        [&](double tau) {
            const double inner = integrate_composite(
                [&](double u) {
                    const double mu = m1 + u / std::sqrt(k1 * tau);
                    const double lq = log_normal_gamma_pdf(mu, tau, m1, k1, a1, b1);
                    const double lp = log_normal_gamma_pdf(mu, tau, m2, k2, a2, b2);
                    return std::exp(log_normal_pdf(u, 0.0, 1.0)) * (lq - lp);
                },
                -12.0, 12.0, 8, 32);
            return std::exp(log_gamma_pdf(tau, a1, b1)) * inner;
        },
        1e-10, tau_hi, 32, 32);
}

/// KL between two fixed-precision normals by quadrature.
inline double kl_normal_quadrature(double m1, double p1, double m2, double p2) {
    const double sd = 1.0 / std::sqrt(std::min(p1, p2));
    const double lo = std::min(m1, m2) - 14.0 * sd, hi = std::max(m1, m2) + 14.0 * sd;
    return integrate_composite(
        [&](double x) {
            const double lq = log_normal_pdf(x, m1, p1);
            return std::exp(lq) * (lq - log_normal_pdf(x, m2, p2));
        },
        lo, hi, 16, 48);
}

}  // namespace oracles
