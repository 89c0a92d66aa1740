#include "oce/normal.hpp"

#include <cmath>
#include <mutex>
#include <numbers>

#include "oce/errors.hpp"

namespace oce {

double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("normal_quantile: p must lie in (0, 1)");
    }
    // Bisection to ~1e-12 interval width, then a few Newton polishes.
    double lo = -40.0, hi = 40.0;
    double x = 0.0;
    for (int i = 0; i < 120; ++i) {
        x = 0.5 * (lo + hi);
        if (normal_cdf(x) < p) {
            lo = x;
        } else {
            hi = x;
        }
        if (hi - lo < 1e-12) break;
    }
    for (int i = 0; i < 4; ++i) {
        const double d = normal_pdf(x);
        if (d <= 0.0) break;
        x -= (normal_cdf(x) - p) / d;
    }
    return x;
}

namespace {

GaussLegendreRule make_gauss_legendre(int n) {
    GaussLegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Newton on the Legendre polynomial from the Chebyshev initial guess.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        rule.nodes[i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

} // namespace

const GaussLegendreRule& gauss_legendre_64() {
    static const GaussLegendreRule rule = make_gauss_legendre(64);
    return rule;
}

double bivariate_normal_tail(double h, double k, double rho) {
    if (!(std::fabs(rho) < 1.0)) {
        throw DomainError("bivariate_normal_tail: |rho| must be < 1");
    }
    const double independent = normal_cdf(-h) * normal_cdf(-k);
    if (rho == 0.0) return independent;
    const GaussLegendreRule& rule = gauss_legendre_64();
    const double two_pi = 2.0 * std::numbers::pi;
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double t = 0.5 * rho * (rule.nodes[i] + 1.0);
        const double w = 0.5 * rho * rule.weights[i];
        const double q = 1.0 - t * t;
        acc += w * std::exp(-(h * h - 2.0 * t * h * k + k * k) / (2.0 * q)) / (two_pi * std::sqrt(q));
    }
    return independent + acc;
}

} // namespace oce
