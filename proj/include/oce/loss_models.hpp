#ifndef OCE_LOSS_MODELS_HPP
#define OCE_LOSS_MODELS_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "oce/rng.hpp"

namespace oce {

struct DisutilitySpec;

/// Normal loss X ~ N(mean, variance); sqrt(variance) is also the
/// sub-Gaussian parameter fed to the concentration bounds.
struct NormalLoss {
    double mean = 0.0;
    double variance = 1.0;

    NormalLoss(double mean_, double variance_);
    double stddev() const;
};

/// Gaussian-factor credit portfolio. Position i defaults when
///   R_i = A_{i,0} eps_i + sum_j A_{i,j} Z_j  >  Phi^{-1}(1 - p_i),
/// with eps_i idiosyncratic and Z_1..Z_d systematic standard normals, and
/// the total loss is sum_i v_i 1{default_i}. Each coupling row
/// [A_{i,0} | A_{i,1..d}] must have unit norm with A_{i,0} > 0, A_{i,j} >= 0.
/// p_i = 1 is admitted as certain default (threshold -inf).
class CreditRiskModel {
public:
    CreditRiskModel(std::vector<double> fractional_loss,
                    std::vector<double> default_probability,
                    std::vector<std::vector<double>> coupling_rows);

    std::size_t positions() const { return fractional_loss_.size(); }
    std::size_t factors() const { return factors_; }
    const std::vector<double>& fractional_loss() const { return fractional_loss_; }
    const std::vector<double>& default_probability() const { return default_probability_; }
    /// Row i is [A_{i,0}, A_{i,1}, ..., A_{i,d}].
    const std::vector<std::vector<double>>& coupling_rows() const { return coupling_rows_; }
    double max_loss() const;

private:
    std::vector<double> fractional_loss_;
    std::vector<double> default_probability_;
    std::vector<std::vector<double>> coupling_rows_;
    std::size_t factors_ = 0;
};

using LossModel = std::variant<NormalLoss, CreditRiskModel>;

struct SampleBatch {
    std::vector<double> values;
    std::uint64_t seed = 0;
    std::string model_tag;
};

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
    double second_moment = 0.0;
    bool exact = true;
};

std::string model_tag(const LossModel& model);

/// Stateful one-draw-at-a-time sampler. sample(model, n, seed) is exactly
/// n draws from LossSampler(model, seed), so incremental consumers (the
/// bandit phases, the streaming estimator) replay batch streams bit for
/// bit. Credit draws consume the d systematic normals first, then one
/// idiosyncratic normal per position, in position order.
class LossSampler {
public:
    LossSampler(LossModel model, std::uint64_t seed);
    double next();

private:
    LossModel model_; // owned: samplers routinely outlive the caller's model
    SplitMix64 rng_;
    std::vector<double> thresholds_;
    std::vector<double> systematic_;
};

/// n i.i.d. losses; bit-identical regeneration under the same
/// (model, n, seed).
SampleBatch sample(const LossModel& model, std::int64_t n, std::uint64_t seed);

/// Exact moments. Credit variance sums the pairwise default covariances
/// P[D_i = D_j = 1] - p_i p_j obtained from the bivariate normal tail at
/// the latent correlation rho_ij = sum_k A_{i,k} A_{j,k} over shared
/// systematic factors (64-point Gauss-Legendre quadrature).
Moments moments(const LossModel& model);

/// Default thresholds r_i = Phi^{-1}(1 - p_i); DomainError unless every
/// p_i lies strictly inside (0, 1).
std::vector<double> credit_thresholds(const CreditRiskModel& model);

/// Variance the portfolio would have if defaults were independent,
/// sum_i v_i^2 p_i (1 - p_i). Exposed because published reference values
/// for factor portfolios are often quoted on this basis.
double independent_default_variance(const CreditRiskModel& model);

/// The bundled 25-position, 6-factor reference portfolio (five loss bands
/// 1.00..2.00, p = 0.05 everywhere, group coupling 0.1 plus a common
/// factor 0.1).
CreditRiskModel credit_portfolio_25();

LossModel load_model(const std::filesystem::path& path);
void save_model(const LossModel& model, const std::filesystem::path& path);

/// Ground-truth fallback: large-n batch estimate with a Monte-Carlo
/// standard error attached. Intended for n >= 1e5.
struct OracleRisk {
    double e_star_hat = 0.0;
    double oce_hat = 0.0;
    double std_error = 0.0;
};
OracleRisk oracle_oce(const LossModel& model, const DisutilitySpec& spec, std::int64_t n,
                      std::uint64_t seed);

} // namespace oce

#endif
