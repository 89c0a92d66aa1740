#ifndef OCE_BATCH_ESTIMATOR_HPP
#define OCE_BATCH_ESTIMATOR_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "oce/disutility.hpp"
#include "oce/loss_models.hpp"

namespace oce {

struct BatchEstimate {
    double e_hat = 0.0;
    double oce_hat = 0.0;
    std::int64_t n = 0;
    int iterations = 0;
    double residual = 0.0; // |mean phi'(x_i - e_hat) - 1|; 0 for the quantile path
};

/// Empirical objective xi + (1/n) sum phi(x_i - xi).
double empirical_objective(std::span<const double> samples, const DisutilitySpec& spec, double xi);

/// Minimizer of the empirical objective. Strictly convex families
/// (mean-variance, entropic) solve g(xi) = (1/n) sum phi'(x_i - xi) - 1 = 0
/// by bracketed bisection polished with Newton; g is strictly decreasing, so
/// the root is unique and |g| <= tol at the result. cvar takes the
/// ceil(n*alpha)-th order statistic (the empirical value-at-risk).
/// expected-loss has no identified minimizer and is refused.
double solve_minimizer(std::span<const double> samples, const DisutilitySpec& spec,
                       double tol = 1e-10);

BatchEstimate estimate_oce(std::span<const double> samples, const DisutilitySpec& spec,
                           double tol = 1e-10);

/// Brute-force check of solve_minimizer: argmin of the empirical objective
/// over a uniform grid on [lo, hi], then one golden-section refinement in
/// the winning cell. Deliberately shares no code with the solver.
struct GridMinimum {
    double xi_star = 0.0;
    double value = 0.0;
};
GridMinimum grid_oracle(std::span<const double> samples, const DisutilitySpec& spec, double lo,
                        double hi, std::int64_t steps);

/// Replicated estimation study against the model's ground truth
/// (closed form where available, otherwise a large-n oracle run).
/// Replication r draws with seed base_seed + r; aggregation uses pairwise
/// summation over the replication-ordered results, so the report is
/// independent of the worker count.
struct ReplicationStudy {
    double mse_e = 0.0;
    double mae_e = 0.0;
    double mse_oce = 0.0;
    double mae_oce = 0.0;
    double se_mse_e = 0.0;
    double se_mae_e = 0.0;
    double se_mse_oce = 0.0;
    double se_mae_oce = 0.0;
    double e_star = 0.0;
    double oce_star = 0.0;
    int reps = 0;
};
ReplicationStudy replicate_mse(const LossModel& model, const DisutilitySpec& spec, std::int64_t n,
                               int reps, std::uint64_t seed, double tol = 1e-10);

/// Per-replication signed errors (e_hat - e*, oce_hat - oce*); the shared
/// engine behind replicate_mse and the tail-frequency studies.
struct ReplicationErrors {
    std::vector<double> err_e;
    std::vector<double> err_oce;
    double e_star = 0.0;
    double oce_star = 0.0;
};
ReplicationErrors replicate_errors(const LossModel& model, const DisutilitySpec& spec,
                                   std::int64_t n, int reps, std::uint64_t seed,
                                   double tol = 1e-10);

/// Ground truth used by the replication studies: closed_form_risk when the
/// pair admits one, otherwise oracle_oce with n = 1e6 on a stream derived
/// from seed.
RiskPoint reference_risk(const LossModel& model, const DisutilitySpec& spec, std::uint64_t seed);

} // namespace oce

#endif
