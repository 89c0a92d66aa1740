#ifndef OCE_DISUTILITY_HPP
#define OCE_DISUTILITY_HPP

#include <optional>
#include <string>
#include <string_view>

#include "oce/loss_models.hpp"

namespace oce {

enum class DisutilityFamily { expected_loss, entropic, mean_variance, cvar };

/// One of the four closed-form disutility families. Every family is
/// nondecreasing (mean-variance apart, below -1/(2c)), closed and convex
/// with phi(0) = 0 and phi'(0) = 1:
///   expected-loss   phi(t) = t
///   entropic        phi(t) = (e^{gamma t} - 1) / gamma,  gamma > 0
///   mean-variance   phi(t) = t + c t^2,                  c > 0
///   cvar            phi(t) = max(t, 0) / (1 - alpha),    alpha in (0, 1)
struct DisutilitySpec {
    DisutilityFamily family = DisutilityFamily::expected_loss;
    double param = 0.0; // gamma | c | alpha; unused for expected-loss

    static DisutilitySpec expected_loss();
    static DisutilitySpec entropic(double gamma);
    static DisutilitySpec mean_variance(double c);
    static DisutilitySpec cvar(double alpha);

    /// One-line text form used by the CLI: "expected-loss",
    /// "entropic:gamma=1", "mean-variance:c=0.5", "cvar:alpha=0.95".
    static DisutilitySpec parse(std::string_view text);
    std::string format() const;
};

struct SmoothnessConstants {
    double strong_convexity = 0.0;                     // mu
    std::optional<double> smoothness;                  // L, absent when no global constant
    std::optional<double> second_derivative_lipschitz; // M
};

/// phi(t). Entropic refuses gamma*t > 700 (double exponent limit) with
/// OverflowError rather than returning infinity.
double phi(const DisutilitySpec& spec, double t);

/// phi'(t); cvar throws KinkError exactly at t = 0.
double phi_prime(const DisutilitySpec& spec, double t);

/// phi''(t); UnsupportedFamilyError for cvar (no second derivative).
double phi_second(const DisutilitySpec& spec, double t);

/// Exact (mu, L, M) where defined; absent optionals are genuinely
/// undefined constants (entropic has no global L, cvar neither).
SmoothnessConstants smoothness_constants(const DisutilitySpec& spec);

struct RiskPoint {
    double minimizer = 0.0; // e*
    double risk = 0.0;      // oce(X)
};

/// Closed-form (e*, oce) where one exists: mean-variance or expected-loss
/// with any model of known moments, entropic with a normal model. Throws
/// NoClosedFormError otherwise (callers fall back to oracle_oce). The
/// expected-loss minimizer is any point; 0 is reported by convention.
RiskPoint closed_form_risk(const DisutilitySpec& spec, const LossModel& model);

} // namespace oce

#endif
