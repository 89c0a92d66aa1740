#include "oce/bounds.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <string>

#include "oce/batch_estimator.hpp"
#include "oce/errors.hpp"
#include "oce/rng.hpp"

namespace oce {

namespace {

double require(double field, const char* name) {
    if (std::isnan(field)) {
        throw IncompleteConstantsError(std::string("bound constants: missing ") + name);
    }
    return field;
}

TailBound capped(double raw) { return {raw, raw < 1.0 ? raw : 1.0}; }

} // namespace

double minimizer_mse_bound(const BoundConstants& k, std::int64_t n) {
    if (n < 1) throw DomainError("minimizer_mse_bound: n must be >= 1");
    const double L = require(k.smoothness, "L");
    const double mu = require(k.strong_convexity, "mu");
    if (!(mu > 0.0)) throw DomainError("minimizer_mse_bound: undefined for mu = 0");
    const double e = require(k.e_star, "e_star");
    const double ex = require(k.mean_x, "mean_x");
    const double ex2 = require(k.second_moment_x, "second_moment_x");
    return (L * L * (e * e + ex2) - 2.0 * e * ex) / (static_cast<double>(n) * mu * mu);
}

TailBound minimizer_tail_bound(const BoundConstants& k, std::int64_t n, double eps) {
    if (n < 1) throw DomainError("minimizer_tail_bound: n must be >= 1");
    if (!(eps > 0.0)) throw DomainError("minimizer_tail_bound: eps must be > 0");
    const double L = require(k.smoothness, "L");
    const double mu = require(k.strong_convexity, "mu");
    const double sigma = require(k.sub_gaussian_sigma, "sigma");
    const double raw =
        2.0 * std::exp(-static_cast<double>(n) * mu * mu * eps * eps / (8.0 * L * L * sigma * sigma));
    return capped(raw);
}

double oce_mse_bound(const BoundConstants& k, std::int64_t n) {
    if (n < 1) throw DomainError("oce_mse_bound: n must be >= 1");
    const double L = require(k.smoothness, "L");
    const double mu = require(k.strong_convexity, "mu");
    if (!(mu > 0.0)) throw DomainError("oce_mse_bound: undefined for mu = 0");
    const double vp = require(k.var_phi, "var_phi");
    const double vpp = require(k.var_phi_prime, "var_phi_prime");
    const double p4 = require(k.fourth_moment_phi_prime, "fourth_phi_prime");
    const double dn = static_cast<double>(n);
    const double mu4 = mu * mu * mu * mu;
    return 2.0 / dn * vp + 27.0 * L * L * vpp * vpp / (2.0 * dn * dn * mu4) +
           9.0 * L * L * p4 / (2.0 * dn * dn * dn * mu4);
}

SubExpConstants subexponential_constants(const BoundConstants& k) {
    const double L = require(k.smoothness, "L");
    const double sigma = require(k.sub_gaussian_sigma, "sigma");
    if (!(L > 0.0) || !(sigma > 0.0)) {
        throw DomainError("subexponential_constants: needs L > 0 and sigma > 0");
    }
    const double e = require(k.e_star, "e_star");
    const double curvature_term = 1.0 / (12.0 * L * sigma * sigma);
    const double drift = std::fabs(L * e - 1.0);
    // L e* = 1 makes the second branch of the min vacuous.
    const double c0 =
        drift == 0.0 ? curvature_term : std::min(curvature_term, 1.0 / (12.0 * sigma * drift));
    const double offset = std::fabs(L * e * e / 2.0 - e);
    SubExpConstants out;
    out.c0 = c0;
    out.c1 = 2.0 * (4.0 + std::exp(3.0 * c0 * offset) - 3.0 * c0 * offset);
    out.c2 = c0 / 2.0;
    out.nu_proof = 4.0 * out.c1 / (out.c2 * out.c2);
    out.nu_statement = 4.0 * out.c1 / out.c2;
    out.rate = 2.0 / out.c2;
    return out;
}

TailBound oce_tail_bound(const BoundConstants& k, std::int64_t n, double eps) {
    if (n < 1) throw DomainError("oce_tail_bound: n must be >= 1");
    if (!(eps > 0.0)) throw DomainError("oce_tail_bound: eps must be > 0");
    const SubExpConstants s = subexponential_constants(k);
    const double L = require(k.smoothness, "L");
    const double mu = require(k.strong_convexity, "mu");
    const double sigma = require(k.sub_gaussian_sigma, "sigma");
    const double dn = static_cast<double>(n);
    const double bernstein = 2.0 * std::exp(-s.c2 * dn * eps * eps / (4.0 * (4.0 * s.c1 + eps)));
    const double minimizer_part =
        2.0 * std::exp(-mu * mu * dn * eps / (24.0 * L * L * L * sigma * sigma));
    return capped(bernstein + minimizer_part);
}

double high_confidence_radius(const BoundConstants& k, std::int64_t n, double delta) {
    if (n < 1) throw DomainError("high_confidence_radius: n must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) {
        throw DomainError("high_confidence_radius: delta must lie in (0, 1)");
    }
    const SubExpConstants s = subexponential_constants(k);
    const double L = require(k.smoothness, "L");
    const double mu = require(k.strong_convexity, "mu");
    const double sigma = require(k.sub_gaussian_sigma, "sigma");
    const double dn = static_cast<double>(n);
    const double lg = std::log(2.0 / delta);
    const double smooth_term = 6.0 * L * L * L * sigma * sigma / (mu * mu);
    const double linear = (1.0 / (s.c2 * dn) + smooth_term / dn) * lg;
    const double inner = 1.0 / s.c2 + smooth_term / dn;
    return linear + std::sqrt(inner * inner * lg * lg + 8.0 * s.c1 * lg / (s.c2 * dn));
}

double sa_k0(const BoundConstants& k) {
    const double sigma = require(k.sub_gaussian_sigma, "sigma");
    const double mu = require(k.strong_convexity, "mu");
    const double L = require(k.smoothness, "L");
    const double b = require(k.step_scale, "b");
    const double M = require(k.second_derivative_lipschitz, "M");
    const double A = require(k.averaging_constant, "A");
    if (!(mu > 0.0) || !(b > 0.0)) throw DomainError("sa_k0: needs mu > 0 and b > 0");
    double k0 = sigma / mu + 6.0 * sigma / (mu * std::sqrt(b)) + 4.0 * L * std::sqrt(b) / mu;
    // The M- and A-terms need tau and the start moments only when their
    // coefficients are nonzero; skipping them avoids 0 * exp(overflow).
    if (M != 0.0) {
        const double tau = require(k.tau, "tau");
        k0 += M * b * tau * tau / (2.0 * std::pow(mu, 1.5)) * (1.0 + std::sqrt(mu * b));
    }
    if (A != 0.0) {
        const double t0_sq = require(k.t0_sq_moment, "t0_sq");
        k0 += 8.0 * A / std::sqrt(mu) * (1.0 / b + L) *
              std::sqrt(t0_sq + sigma * sigma / (L * L));
        if (M != 0.0) {
            const double tau = require(k.tau, "tau");
            const double t0_4 = require(k.t0_fourth_moment, "t0_fourth");
            k0 += 5.0 * M * std::sqrt(b) * tau / (2.0 * mu) * A *
                  std::exp(24.0 * std::pow(L, 4) * std::pow(b, 4)) *
                  std::sqrt(t0_sq + mu * t0_4 / (20.0 * b * tau * tau) +
                            2.0 * tau * tau * b * b * b * mu + 8.0 * tau * tau * b * b);
        }
    }
    return k0;
}

double sa_oce_bound(const BoundConstants& k, std::int64_t m, bool statement_variance_term) {
    if (m < 1) throw DomainError("sa_oce_bound: m must be >= 1");
    const double L = require(k.smoothness, "L");
    const double vp = require(k.var_phi, "var_phi");
    const double vpp = require(k.var_phi_prime, "var_phi_prime");
    const double k0 = sa_k0(k);
    const double dm = static_cast<double>(m);
    const double last = statement_variance_term ? vp : std::sqrt(vp);
    return L * k0 * k0 / (2.0 * dm) + k0 * std::sqrt(vpp) / dm + last / std::sqrt(dm);
}

double bandit_exponent(const BoundConstants& k) {
    const SubExpConstants s = subexponential_constants(k);
    const double L = require(k.smoothness, "L");
    const double mu = require(k.strong_convexity, "mu");
    const double sigma = require(k.sub_gaussian_sigma, "sigma");
    const double g1 = s.c2 * s.c2 / (32.0 * s.c1);
    const double g2 = s.c2 / 8.0;
    const double g3 = mu * mu / (24.0 * L * L * L * sigma * sigma);
    return std::min(g1, std::min(g2, g3));
}

namespace {

double sr_log_bar_k(int num_arms) {
    double acc = 0.5;
    for (int i = 2; i <= num_arms; ++i) acc += 1.0 / static_cast<double>(i);
    return acc;
}

} // namespace

TailBound bandit_bound(std::span<const BoundConstants> arms, std::span<const double> gaps,
                       std::int64_t n) {
    const int num_arms = static_cast<int>(arms.size());
    if (num_arms < 2) throw DomainError("bandit_bound: needs K >= 2");
    if (gaps.size() != arms.size()) throw DomainError("bandit_bound: one gap per arm");
    if (n < num_arms) throw BudgetError("bandit_bound: needs n >= K");
    double g_max = 0.0;
    for (const auto& arm : arms) g_max = std::max(g_max, bandit_exponent(arm));
    double hardness = 0.0;
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        const double gap = gaps[i];
        if (!(gap > 0.0)) throw DomainError("bandit_bound: gaps must be > 0");
        const double denom = std::min(gap / 2.0, gap * gap / 4.0);
        hardness = std::max(hardness, static_cast<double>(i + 1) / denom);
    }
    const double dk = static_cast<double>(num_arms);
    const double exponent = -(static_cast<double>(n) - dk) * g_max /
                            (hardness * sr_log_bar_k(num_arms));
    return capped(4.0 * dk * (dk - 1.0) * std::exp(exponent));
}

EmpiricalTail empirical_tail(const LossModel& model, const DisutilitySpec& spec, std::int64_t n,
                             double eps, int reps, std::uint64_t seed, TailTarget target) {
    if (!(eps >= 0.0)) throw DomainError("empirical_tail: eps must be >= 0");
    const ReplicationErrors errors = replicate_errors(model, spec, n, reps, seed);
    const std::vector<double>& err =
        target == TailTarget::minimizer ? errors.err_e : errors.err_oce;
    int hits = 0;
    for (double e : err) {
        if (std::fabs(e) >= eps) ++hits;
    }
    EmpiricalTail out;
    out.reps = reps;
    out.frequency = static_cast<double>(hits) / static_cast<double>(reps);
    out.std_error =
        std::sqrt(out.frequency * (1.0 - out.frequency) / static_cast<double>(reps));
    return out;
}

BoundConstants mean_variance_normal_constants(double c, const NormalLoss& model, double step_b,
                                              double step_alpha, double averaging_constant,
                                              double t0) {
    if (!(c > 0.0)) throw DomainError("mean_variance_normal_constants: c must be > 0");
    BoundConstants k;
    const double var = model.variance;
    k.smoothness = 2.0 * c;
    k.strong_convexity = 2.0 * c;
    k.second_derivative_lipschitz = 0.0;
    k.sub_gaussian_sigma = model.stddev();
    k.e_star = model.mean;
    k.mean_x = model.mean;
    k.second_moment_x = var + model.mean * model.mean;
    // With Z = X - e* ~ N(0, var): Var(Z + c Z^2) = var + 2 c^2 var^2,
    // phi' - 1 = 2 c Z ~ N(0, w2), E[(1 + 2cZ)^4] = 1 + 6 w2 + 3 w2^2.
    const double w2 = 4.0 * c * c * var;
    k.var_phi = var + 2.0 * c * c * var * var;
    k.var_phi_prime = w2;
    k.fourth_moment_phi_prime = 1.0 + 6.0 * w2 + 3.0 * w2 * w2;
    k.tau = std::pow(3.0 * w2 * w2, 0.25); // tau^4 = E[(2cZ)^4] = 3 w2^2
    k.step_scale = step_b;
    k.step_exponent = step_alpha;
    k.averaging_constant = averaging_constant;
    const double d = t0 - model.mean;
    k.t0_sq_moment = d * d;
    k.t0_fourth_moment = d * d * d * d;
    return k;
}

double estimate_tau(const LossModel& model, const DisutilitySpec& spec, double e_star,
                    std::int64_t n, std::uint64_t seed) {
    if (n < 1) throw DomainError("estimate_tau: n must be >= 1");
    const SampleBatch batch = sample(model, n, seed);
    double acc = 0.0;
    for (double x : batch.values) {
        const double y = 1.0 - phi_prime(spec, x - e_star);
        acc += y * y * y * y;
    }
    return std::pow(acc / static_cast<double>(n), 0.25);
}

BoundConstants load_constants(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open constants file: " + path.string());
    BoundConstants k;
    std::map<std::string, double*> fields = {
        {"L", &k.smoothness},
        {"mu", &k.strong_convexity},
        {"sigma", &k.sub_gaussian_sigma},
        {"e_star", &k.e_star},
        {"mean_x", &k.mean_x},
        {"second_moment_x", &k.second_moment_x},
        {"var_phi", &k.var_phi},
        {"var_phi_prime", &k.var_phi_prime},
        {"fourth_phi_prime", &k.fourth_moment_phi_prime},
        {"tau", &k.tau},
        {"M", &k.second_derivative_lipschitz},
        {"b", &k.step_scale},
        {"alpha", &k.step_exponent},
        {"A", &k.averaging_constant},
        {"t0_sq", &k.t0_sq_moment},
        {"t0_fourth", &k.t0_fourth_moment},
    };
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError("constants file: expected key=value, got '" + line + "'");
        }
        std::string key = line.substr(0, eq);
        key.erase(key.find_last_not_of(" \t\r") + 1);
        const auto it = fields.find(key);
        if (it == fields.end()) throw ParseError("constants file: unknown key '" + key + "'");
        try {
            *it->second = std::stod(line.substr(eq + 1));
        } catch (const std::exception&) {
            throw ParseError("constants file: bad value for '" + key + "'");
        }
    }
    return k;
}

} // namespace oce
