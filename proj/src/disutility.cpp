#include "oce/disutility.hpp"

#include <cmath>
#include <sstream>

#include "oce/errors.hpp"

namespace oce {

namespace {

constexpr double k_exp_limit = 700.0; // refuse e^x beyond this exponent

void check_entropic_exponent(double gamma_t) {
    if (gamma_t > k_exp_limit) {
        throw OverflowError("entropic disutility: gamma*t = " + std::to_string(gamma_t) +
                            " exceeds the e^700 overflow threshold");
    }
}

} // namespace

DisutilitySpec DisutilitySpec::expected_loss() { return {DisutilityFamily::expected_loss, 0.0}; }

DisutilitySpec DisutilitySpec::entropic(double gamma) {
    if (!(gamma > 0.0)) throw DomainError("entropic: gamma must be > 0");
    return {DisutilityFamily::entropic, gamma};
}

DisutilitySpec DisutilitySpec::mean_variance(double c) {
    if (!(c > 0.0)) throw DomainError("mean-variance: c must be > 0");
    return {DisutilityFamily::mean_variance, c};
}

DisutilitySpec DisutilitySpec::cvar(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("cvar: alpha must lie in (0, 1)");
    return {DisutilityFamily::cvar, alpha};
}

DisutilitySpec DisutilitySpec::parse(std::string_view text) {
    if (text == "expected-loss") return expected_loss();
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw ParseError("bad disutility spec '" + std::string(text) + "'");
    }
    const std::string_view name = text.substr(0, colon);
    const std::string_view rest = text.substr(colon + 1);
    const auto eq = rest.find('=');
    if (eq == std::string_view::npos) {
        throw ParseError("bad disutility spec '" + std::string(text) + "'");
    }
    const std::string_view key = rest.substr(0, eq);
    double value = 0.0;
    try {
        value = std::stod(std::string(rest.substr(eq + 1)));
    } catch (const std::exception&) {
        throw ParseError("bad disutility parameter in '" + std::string(text) + "'");
    }
    if (name == "entropic" && key == "gamma") return entropic(value);
    if (name == "mean-variance" && key == "c") return mean_variance(value);
    if (name == "cvar" && key == "alpha") return cvar(value);
    throw ParseError("unknown disutility spec '" + std::string(text) + "'");
}

std::string DisutilitySpec::format() const {
    std::ostringstream os;
    switch (family) {
        case DisutilityFamily::expected_loss: return "expected-loss";
        case DisutilityFamily::entropic: os << "entropic:gamma=" << param; break;
        case DisutilityFamily::mean_variance: os << "mean-variance:c=" << param; break;
        case DisutilityFamily::cvar: os << "cvar:alpha=" << param; break;
    }
    return os.str();
}

double phi(const DisutilitySpec& spec, double t) {
    switch (spec.family) {
        case DisutilityFamily::expected_loss:
            return t;
        case DisutilityFamily::entropic:
            check_entropic_exponent(spec.param * t);
            return std::expm1(spec.param * t) / spec.param;
        case DisutilityFamily::mean_variance:
            return t + spec.param * t * t;
        case DisutilityFamily::cvar:
            return t > 0.0 ? t / (1.0 - spec.param) : 0.0;
    }
    throw Error("phi: unreachable family");
}

double phi_prime(const DisutilitySpec& spec, double t) {
    switch (spec.family) {
        case DisutilityFamily::expected_loss:
            return 1.0;
        case DisutilityFamily::entropic:
            check_entropic_exponent(spec.param * t);
            return std::exp(spec.param * t);
        case DisutilityFamily::mean_variance:
            return 1.0 + 2.0 * spec.param * t;
        case DisutilityFamily::cvar:
            if (t == 0.0) {
                throw KinkError("cvar disutility has no derivative at t = 0; "
                                "use the subgradient-aware quantile path");
            }
            return t > 0.0 ? 1.0 / (1.0 - spec.param) : 0.0;
    }
    throw Error("phi_prime: unreachable family");
}

double phi_second(const DisutilitySpec& spec, double t) {
    switch (spec.family) {
        case DisutilityFamily::expected_loss:
            return 0.0;
        case DisutilityFamily::entropic:
            check_entropic_exponent(spec.param * t);
            return spec.param * std::exp(spec.param * t);
        case DisutilityFamily::mean_variance:
            return 2.0 * spec.param;
        case DisutilityFamily::cvar:
            throw UnsupportedFamilyError("cvar disutility has no second derivative");
    }
    throw Error("phi_second: unreachable family");
}

SmoothnessConstants smoothness_constants(const DisutilitySpec& spec) {
    SmoothnessConstants out;
    switch (spec.family) {
        case DisutilityFamily::expected_loss:
            out.strong_convexity = 0.0;
            out.smoothness = 0.0;
            out.second_derivative_lipschitz = 0.0;
            break;
        case DisutilityFamily::entropic:
            // phi'' = gamma e^{gamma t} ranges over (0, inf): no global mu or L,
            // and phi''' is unbounded, so no global M either.
            out.strong_convexity = 0.0;
            break;
        case DisutilityFamily::mean_variance:
            out.strong_convexity = 2.0 * spec.param;
            out.smoothness = 2.0 * spec.param;
            out.second_derivative_lipschitz = 0.0;
            break;
        case DisutilityFamily::cvar:
            out.strong_convexity = 0.0;
            break;
    }
    return out;
}

RiskPoint closed_form_risk(const DisutilitySpec& spec, const LossModel& model) {
    const Moments mom = moments(model);
    switch (spec.family) {
        case DisutilityFamily::expected_loss:
            return {0.0, mom.mean};
        case DisutilityFamily::mean_variance:
            return {mom.mean, mom.mean + spec.param * mom.variance};
        case DisutilityFamily::entropic: {
            const auto* normal = std::get_if<NormalLoss>(&model);
            if (normal == nullptr) {
                throw NoClosedFormError("entropic risk has a closed form for normal losses only");
            }
            // log E[e^{gamma X}] / gamma = mean + gamma variance / 2
            const double value = normal->mean + spec.param * normal->variance / 2.0;
            return {value, value};
        }
        case DisutilityFamily::cvar:
            throw NoClosedFormError("no closed-form cvar path; use oracle_oce");
    }
    throw Error("closed_form_risk: unreachable family");
}

} // namespace oce
