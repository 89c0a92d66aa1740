#include "oce/batch_estimator.hpp"

#include <algorithm>
#include <cmath>

#include "oce/errors.hpp"
#include "oce/numeric.hpp"
#include "oce/parallel.hpp"
#include "oce/rng.hpp"

namespace oce {

double empirical_objective(std::span<const double> samples, const DisutilitySpec& spec,
                           double xi) {
    double acc = 0.0;
    for (double x : samples) acc += phi(spec, x - xi);
    return xi + acc / static_cast<double>(samples.size());
}

namespace {

double first_order_residual(std::span<const double> samples, const DisutilitySpec& spec,
                            double xi) {
    double acc = 0.0;
    for (double x : samples) acc += phi_prime(spec, x - xi);
    return acc / static_cast<double>(samples.size()) - 1.0;
}

double residual_slope(std::span<const double> samples, const DisutilitySpec& spec, double xi) {
    double acc = 0.0;
    for (double x : samples) acc += phi_second(spec, x - xi);
    return -acc / static_cast<double>(samples.size());
}

/// ceil(n * alpha) as an exact integer index (1-based), clamped to [1, n].
std::int64_t quantile_index(std::int64_t n, double alpha) {
    auto k = static_cast<std::int64_t>(std::ceil(static_cast<double>(n) * alpha));
    while (k > 1 && static_cast<double>(k - 1) >= static_cast<double>(n) * alpha) --k;
    return std::clamp<std::int64_t>(k, 1, n);
}

double empirical_var(std::span<const double> samples, double alpha) {
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    return sorted[static_cast<std::size_t>(quantile_index(sorted.size(), alpha) - 1)];
}

struct RootResult {
    double root = 0.0;
    int iterations = 0;
    double residual = 0.0;
};

/// g(xi) = mean phi'(x - xi) - 1 is strictly decreasing for strictly convex
/// families. Bracket [min x - 1, max x + 1], doubled outward until the sign
/// changes; bisection steps with a Newton step whenever it stays inside the
/// bracket.
RootResult solve_first_order(std::span<const double> samples, const DisutilitySpec& spec,
                             double tol) {
    const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
    double lo = *mn - 1.0, hi = *mx + 1.0;
    double g_lo = first_order_residual(samples, spec, lo);
    double g_hi = first_order_residual(samples, spec, hi);
    int expansions = 0;
    while (g_lo < 0.0 || g_hi > 0.0) {
        if (++expansions > 200) {
            throw NoRootError("solve_minimizer: no sign change after 200 bracket doublings");
        }
        const double span = hi - lo;
        if (g_lo < 0.0) {
            lo -= span;
            g_lo = first_order_residual(samples, spec, lo);
        }
        if (g_hi > 0.0) {
            hi += span;
            g_hi = first_order_residual(samples, spec, hi);
        }
    }
    RootResult out;
    double xi = 0.5 * (lo + hi);
    for (int it = 1; it <= 500; ++it) {
        out.iterations = it;
        const double g = first_order_residual(samples, spec, xi);
        out.root = xi;
        out.residual = std::fabs(g);
        if (out.residual <= tol) return out;
        if (g > 0.0) {
            lo = xi;
        } else {
            hi = xi;
        }
        const double slope = residual_slope(samples, spec, xi);
        double next = slope < 0.0 ? xi - g / slope : lo - 1.0;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi); // Newton left the bracket
        xi = next;
    }
    throw NoRootError("solve_minimizer: residual stalled at " + std::to_string(out.residual) +
                      " after 500 iterations; tol " + std::to_string(tol) +
                      " is below the rounding floor of this data scale");
}

} // namespace

double solve_minimizer(std::span<const double> samples, const DisutilitySpec& spec, double tol) {
    if (samples.empty()) throw DomainError("solve_minimizer: empty batch");
    switch (spec.family) {
        case DisutilityFamily::cvar:
            return empirical_var(samples, spec.param);
        case DisutilityFamily::expected_loss:
            throw UnsupportedFamilyError(
                "solve_minimizer: expected-loss has no identified minimizer (mu = 0)");
        case DisutilityFamily::mean_variance:
        case DisutilityFamily::entropic:
            return solve_first_order(samples, spec, tol).root;
    }
    throw Error("solve_minimizer: unreachable family");
}

BatchEstimate estimate_oce(std::span<const double> samples, const DisutilitySpec& spec,
                           double tol) {
    if (samples.empty()) throw DomainError("estimate_oce: empty batch");
    BatchEstimate out;
    out.n = static_cast<std::int64_t>(samples.size());
    if (spec.family == DisutilityFamily::cvar) {
        out.e_hat = empirical_var(samples, spec.param);
        out.iterations = 0;
        out.residual = 0.0;
    } else if (spec.family == DisutilityFamily::expected_loss) {
        throw UnsupportedFamilyError(
            "estimate_oce: expected-loss has no identified minimizer (mu = 0)");
    } else {
        const auto root = solve_first_order(samples, spec, tol);
        out.e_hat = root.root;
        out.iterations = root.iterations;
        out.residual = root.residual;
    }
    out.oce_hat = empirical_objective(samples, spec, out.e_hat);
    return out;
}

GridMinimum grid_oracle(std::span<const double> samples, const DisutilitySpec& spec, double lo,
                        double hi, std::int64_t steps) {
    if (!(lo < hi)) throw DomainError("grid_oracle: needs lo < hi");
    if (steps < 1000) throw DomainError("grid_oracle: needs steps >= 1000");
    const double n = static_cast<double>(samples.size());
    auto objective = [&](double xi) {
        double acc = 0.0;
        for (double x : samples) acc += phi(spec, x - xi);
        return xi + acc / n;
    };
    const double h = (hi - lo) / static_cast<double>(steps);
    double best_xi = lo;
    double best_val = objective(lo);
    for (std::int64_t i = 1; i <= steps; ++i) {
        const double xi = lo + h * static_cast<double>(i);
        const double val = objective(xi);
        if (val < best_val) {
            best_val = val;
            best_xi = xi;
        }
    }
    // Golden-section pass inside the winning cell.
    double a = std::max(lo, best_xi - h);
    double b = std::min(hi, best_xi + h);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = objective(c), fd = objective(d);
    for (int it = 0; it < 200 && (b - a) > 1e-13 * std::max(1.0, std::fabs(best_xi)); ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
    }
    const double mid = 0.5 * (a + b);
    const double fmid = objective(mid);
    if (fmid < best_val) {
        best_val = fmid;
        best_xi = mid;
    }
    return {best_xi, best_val};
}

RiskPoint reference_risk(const LossModel& model, const DisutilitySpec& spec, std::uint64_t seed) {
    try {
        return closed_form_risk(spec, model);
    } catch (const NoClosedFormError&) {
        const OracleRisk oracle = oracle_oce(model, spec, 1000000, mix_seed(seed, 0x0ac1eULL));
        return {oracle.e_star_hat, oracle.oce_hat};
    }
}

ReplicationErrors replicate_errors(const LossModel& model, const DisutilitySpec& spec,
                                   std::int64_t n, int reps, std::uint64_t seed, double tol) {
    if (reps < 1) throw DomainError("replicate_errors: reps must be >= 1");
    const RiskPoint truth = reference_risk(model, spec, seed);
    ReplicationErrors out;
    out.e_star = truth.minimizer;
    out.oce_star = truth.risk;
    out.err_e.resize(static_cast<std::size_t>(reps));
    out.err_oce.resize(static_cast<std::size_t>(reps));
    parallel_for(reps, [&](std::int64_t r) {
        const SampleBatch batch = sample(model, n, seed + static_cast<std::uint64_t>(r));
        const BatchEstimate est = estimate_oce(batch.values, spec, tol);
        out.err_e[static_cast<std::size_t>(r)] = est.e_hat - truth.minimizer;
        out.err_oce[static_cast<std::size_t>(r)] = est.oce_hat - truth.risk;
    });
    return out;
}

ReplicationStudy replicate_mse(const LossModel& model, const DisutilitySpec& spec, std::int64_t n,
                               int reps, std::uint64_t seed, double tol) {
    const ReplicationErrors errors = replicate_errors(model, spec, n, reps, seed, tol);
    const std::size_t m = errors.err_e.size();
    std::vector<double> sq_e(m), abs_e(m), sq_oce(m), abs_oce(m);
    for (std::size_t i = 0; i < m; ++i) {
        sq_e[i] = errors.err_e[i] * errors.err_e[i];
        abs_e[i] = std::fabs(errors.err_e[i]);
        sq_oce[i] = errors.err_oce[i] * errors.err_oce[i];
        abs_oce[i] = std::fabs(errors.err_oce[i]);
    }
    ReplicationStudy out;
    out.mse_e = mean_of(sq_e);
    out.mae_e = mean_of(abs_e);
    out.mse_oce = mean_of(sq_oce);
    out.mae_oce = mean_of(abs_oce);
    out.se_mse_e = standard_error(sq_e);
    out.se_mae_e = standard_error(abs_e);
    out.se_mse_oce = standard_error(sq_oce);
    out.se_mae_oce = standard_error(abs_oce);
    out.e_star = errors.e_star;
    out.oce_star = errors.oce_star;
    out.reps = reps;
    return out;
}

} // namespace oce
