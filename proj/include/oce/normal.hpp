#ifndef OCE_NORMAL_HPP
#define OCE_NORMAL_HPP

#include <span>
#include <vector>

namespace oce {

double normal_pdf(double x);

/// Standard normal CDF via erfc.
double normal_cdf(double x);

/// Standard normal quantile, bisection bracketing refined by Newton on the
/// erfc-based CDF. Absolute error below 1e-9 over (0, 1); throws
/// DomainError outside (0, 1).
double normal_quantile(double p);

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussLegendreRule& gauss_legendre_64();

/// P[Z1 > h, Z2 > k] for a standard bivariate normal pair with correlation
/// rho, via the tetrachoric integral
///   P = cdf(-h) cdf(-k) + int_0^rho pdf2(h, k; t) dt
/// evaluated with the 64-point Gauss-Legendre rule. Requires |rho| < 1.
double bivariate_normal_tail(double h, double k, double rho);

} // namespace oce

#endif
