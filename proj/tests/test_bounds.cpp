#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "oce/bounds.hpp"
#include "oce/errors.hpp"
#include "oce/normal.hpp"
#include "oracles.hpp"

using namespace oce;

namespace {

/// The running example: mean-variance c = 0.5 on N(0.5, 25).
BoundConstants example_constants() {
    return mean_variance_normal_constants(0.5, NormalLoss(0.5, 25.0), 10.0, 0.6, 0.0, 1.0);
}

BoundConstants random_constants(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.2, 3.0);
    std::uniform_real_distribution<double> alphas(0.55, 0.95);
    // keep L = 2c >= 1 so the minimizer mse numerator stays a bound
    const double c = 0.5 + 0.5 * unit(rng);
    const double mean = unit(rng) - 1.5;
    const double var = unit(rng);
    return mean_variance_normal_constants(c, NormalLoss(mean, var), unit(rng) * 3.0, alphas(rng),
                                          unit(rng), mean + unit(rng));
}

} // namespace

TEST_CASE("analytic constants for the running example") {
    const BoundConstants k = example_constants();
    CHECK(k.smoothness == doctest::Approx(1.0));
    CHECK(k.strong_convexity == doctest::Approx(1.0));
    CHECK(k.sub_gaussian_sigma == doctest::Approx(5.0));
    CHECK(k.e_star == doctest::Approx(0.5));
    CHECK(k.second_moment_x == doctest::Approx(25.25));
    // quadrature check of the closed-form normal moments
    const double var_phi = oracles::normal_expectation(
                               5.0, [](double z) { return std::pow(z + 0.5 * z * z, 2); }) -
                           std::pow(oracles::normal_expectation(
                                        5.0, [](double z) { return z + 0.5 * z * z; }),
                                    2);
    CHECK(k.var_phi == doctest::Approx(var_phi).epsilon(1e-8));
    CHECK(k.var_phi == doctest::Approx(337.5).epsilon(1e-12));
    const double fourth = oracles::normal_expectation(
        5.0, [](double z) { return std::pow(1.0 + z, 4); });
    CHECK(k.fourth_moment_phi_prime == doctest::Approx(fourth).epsilon(1e-8));
    CHECK(k.fourth_moment_phi_prime == doctest::Approx(2026.0).epsilon(1e-12));
    CHECK(k.var_phi_prime == doctest::Approx(25.0).epsilon(1e-12));
    // tau^4 = E[(phi' - 1)^4] = 3 var^2
    CHECK(std::pow(k.tau, 4) == doctest::Approx(3.0 * 625.0).epsilon(1e-12));
}

TEST_CASE("minimizer mse bound") {
    const BoundConstants k = example_constants();
    CHECK(minimizer_mse_bound(k, 100) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(minimizer_mse_bound(k, 1) == doctest::Approx(25.0).epsilon(1e-12));
    CHECK(minimizer_mse_bound(k, 10) == doctest::Approx(minimizer_mse_bound(k, 100) * 10.0));
    CHECK(minimizer_mse_bound(k, 100) ==
          doctest::Approx(oracles::mse_min_bound(1.0, 1.0, 0.5, 0.5, 25.25, 100.0)));
    BoundConstants degenerate = k;
    degenerate.strong_convexity = 0.0;
    CHECK_THROWS_AS(minimizer_mse_bound(degenerate, 10), DomainError);
}

TEST_CASE("minimizer tail bound") {
    const BoundConstants k = example_constants();
    const TailBound at5 = minimizer_tail_bound(k, 100, 5.0);
    CHECK(at5.raw == doctest::Approx(2.0 * std::exp(-12.5)).epsilon(1e-12));
    CHECK(at5.raw == doctest::Approx(7.45e-6).epsilon(1e-3));
    CHECK(at5.prob == at5.raw);
    // vacuous at eps -> 0+
    const TailBound tiny = minimizer_tail_bound(k, 100, 1e-12);
    CHECK(tiny.raw == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(tiny.prob == 1.0);
    // doubling eps quadruples the exponent
    const double e1 = -std::log(minimizer_tail_bound(k, 50, 0.3).raw / 2.0);
    const double e2 = -std::log(minimizer_tail_bound(k, 50, 0.6).raw / 2.0);
    CHECK(e2 == doctest::Approx(4.0 * e1).epsilon(1e-9));
    CHECK(minimizer_tail_bound(k, 77, 0.4).raw ==
          doctest::Approx(oracles::conc_min_bound(1.0, 1.0, 5.0, 77.0, 0.4)));
}

TEST_CASE("oce mse bound and its term structure") {
    const BoundConstants k = example_constants();
    const double at1000 = oce_mse_bound(k, 1000);
    CHECK(at1000 ==
          doctest::Approx(oracles::mse_oce_bound(1.0, 1.0, 337.5, 25.0, 2026.0, 1000.0)));
    // leading variance term dominates at n = 1000
    const double leading = 2.0 / 1000.0 * 337.5;
    CHECK(at1000 < 1.05 * leading);
    CHECK(at1000 > leading);
    // constant loss: zero variance fields kill the first two terms
    BoundConstants constant = k;
    constant.var_phi = 0.0;
    constant.var_phi_prime = 0.0;
    const double residual = oce_mse_bound(constant, 10);
    CHECK(residual == doctest::Approx(9.0 * 2026.0 / (2.0 * 1000.0)).epsilon(1e-12));
    // super-linear terms: n = 1 to n = 10 drops faster than 10x
    CHECK(oce_mse_bound(k, 1) / oce_mse_bound(k, 10) > 10.0);
    BoundConstants incomplete = k;
    incomplete.var_phi = BoundConstants::unset;
    CHECK_THROWS_AS(oce_mse_bound(incomplete, 10), IncompleteConstantsError);
}

TEST_CASE("sub-exponential constants") {
    const BoundConstants k = example_constants();
    const SubExpConstants s = subexponential_constants(k);
    CHECK(s.c0 == doctest::Approx(1.0 / 300.0).epsilon(1e-12));
    CHECK(s.c2 == doctest::Approx(1.0 / 600.0).epsilon(1e-12));
    CHECK(s.c2 == s.c0 / 2.0);
    CHECK(s.c1 == doctest::Approx(10.0000140801).epsilon(1e-9));
    CHECK(s.c1 >= 8.0);
    CHECK(s.nu_proof == doctest::Approx(4.0 * s.c1 / (s.c2 * s.c2)));
    CHECK(s.nu_statement == doctest::Approx(4.0 * s.c1 / s.c2));
    CHECK(s.rate == doctest::Approx(2.0 / s.c2));

    // L e* = 1 exactly: the drift branch of the min drops out
    BoundConstants unit = k;
    unit.e_star = 1.0; // L = 1
    const SubExpConstants su = subexponential_constants(unit);
    CHECK(su.c0 == doctest::Approx(1.0 / 300.0).epsilon(1e-12));

    // e* = 0: offset vanishes, C1 = 2 (4 + 1 - 0) = 10
    BoundConstants centered = k;
    centered.e_star = 0.0;
    CHECK(subexponential_constants(centered).c1 == doctest::Approx(10.0).epsilon(1e-12));

    // C1 >= 8 over random constants
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        CHECK(subexponential_constants(random_constants(rng)).c1 >= 8.0);
    }
}

TEST_CASE("oce tail bound") {
    const BoundConstants k = example_constants();
    const TailBound big = oce_tail_bound(k, 10000, 1.0);
    CHECK(big.raw == doctest::Approx(oracles::conc_oce_bound(1.0, 1.0, 5.0, 0.5, 10000.0, 1.0))
                         .epsilon(1e-12));
    CHECK(big.raw == doctest::Approx(1.80673503).epsilon(1e-6));
    CHECK(big.prob == 1.0);
    // eps -> 0+ gives the vacuous 4
    CHECK(oce_tail_bound(k, 100, 1e-14).raw == doctest::Approx(4.0).epsilon(1e-9));
    // nonincreasing in n
    double prev = oce_tail_bound(k, 10, 0.5).raw;
    for (const std::int64_t n : {100, 1000, 10000, 100000}) {
        const double cur = oce_tail_bound(k, n, 0.5).raw;
        CHECK(cur <= prev + 1e-15);
        prev = cur;
    }
}

TEST_CASE("high-confidence radius inverts the tail bound") {
    const BoundConstants k = example_constants();
    CHECK_THROWS_AS(high_confidence_radius(k, 100, 1.0), DomainError);
    CHECK_THROWS_AS(high_confidence_radius(k, 100, 0.0), DomainError);
    CHECK(high_confidence_radius(k, 1000, 0.05) > high_confidence_radius(k, 1000, 0.5));
    CHECK(high_confidence_radius(k, 1000, 0.1) ==
          doctest::Approx(oracles::radius(1.0, 1.0, 5.0, 0.5, 1000.0, 0.1)).epsilon(1e-12));

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> deltas(0.01, 0.99);
    std::uniform_int_distribution<std::int64_t> ns(5, 200000);
    for (int i = 0; i < 20; ++i) {
        const std::int64_t n = ns(rng);
        const double delta = deltas(rng);
        const double eps = high_confidence_radius(k, n, delta);
        CHECK(oce_tail_bound(k, n, eps).raw <= delta + 1e-9);
    }
}

TEST_CASE("averaged-iterate constant") {
    // M = 0, A = 0, start at the minimizer: only three terms survive
    BoundConstants k = example_constants(); // A = 0, M = 0 already
    k.t0_sq_moment = 0.0;
    k.t0_fourth_moment = 0.0;
    const double expected = 5.0 / 1.0 + 6.0 * 5.0 / std::sqrt(10.0) + 4.0 * std::sqrt(10.0);
    CHECK(sa_k0(k) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(sa_k0(k) == doctest::Approx(27.1359436212).epsilon(1e-9));

    // doubling sigma doubles the sigma terms exactly
    BoundConstants doubled = k;
    doubled.sub_gaussian_sigma = 10.0;
    const double shared = 4.0 * std::sqrt(10.0);
    CHECK(sa_k0(doubled) - shared == doctest::Approx(2.0 * (sa_k0(k) - shared)).epsilon(1e-12));

    // full parameterization with A = 1: finite, positive, matches the
    // second transcription
    BoundConstants full = mean_variance_normal_constants(0.5, NormalLoss(0.5, 25.0), 10.0, 0.6,
                                                         1.0, 1.0);
    const double value = sa_k0(full);
    CHECK(std::isfinite(value));
    CHECK(value > 0.0);
    CHECK(value == doctest::Approx(oracles::k0(5.0, 1.0, 1.0, 10.0, 0.0, 1.0, full.tau,
                                                full.t0_sq_moment, full.t0_fourth_moment)));

    BoundConstants missing = full;
    missing.averaging_constant = BoundConstants::unset;
    CHECK_THROWS_AS(sa_k0(missing), IncompleteConstantsError);
}

TEST_CASE("streaming oce bound") {
    BoundConstants k = example_constants();
    k.t0_sq_moment = 0.25;
    k.t0_fourth_moment = 0.0625;
    const double k0_value = sa_k0(k);
    CHECK(sa_oce_bound(k, 5000) ==
          doctest::Approx(oracles::sa_oce(1.0, k0_value, 337.5, 25.0, 5000.0)).epsilon(1e-12));
    // at large m the sqrt(m) term dominates
    const double m = 5000.0;
    const double tail_term = std::sqrt(337.5) / std::sqrt(m);
    CHECK(sa_oce_bound(k, 5000) < 2.5 * tail_term);
    // zero-variance, zero-K0 degenerate case
    BoundConstants zero = k;
    zero.var_phi = 0.0;
    zero.var_phi_prime = 0.0;
    zero.sub_gaussian_sigma = 0.0;
    zero.smoothness = 0.0;
    CHECK(sa_oce_bound(zero, 100) == 0.0);
    // m -> 4m at least halves the bound
    CHECK(sa_oce_bound(k, 4000) <= 0.5 * sa_oce_bound(k, 1000));
    // statement-form flag swaps sqrt(var) for var in the slow term
    const double proof_form = sa_oce_bound(k, 10000);
    const double statement_form = sa_oce_bound(k, 10000, true);
    CHECK(statement_form - proof_form ==
          doctest::Approx((337.5 - std::sqrt(337.5)) / 100.0).epsilon(1e-9));
}

TEST_CASE("bandit bound") {
    const BoundConstants k = example_constants();
    const std::vector<BoundConstants> arms = {k, k};
    // K = 2, gap delta: H = 2 / min(delta/2, delta^2/4), log_bar 2 = 1
    const double delta = 1.0;
    const std::vector<double> gaps = {delta, delta};
    const double g = bandit_exponent(k);
    const TailBound bound = bandit_bound(arms, gaps, 100);
    const double hardness = 2.0 / std::min(delta / 2.0, delta * delta / 4.0);
    CHECK(hardness == doctest::Approx(8.0));
    CHECK(bound.raw == doctest::Approx(oracles::bandit_bound(g, hardness, 2, 100.0)).epsilon(1e-12));
    // n = K: exponent zero, capped at one
    const TailBound at_k = bandit_bound(arms, gaps, 2);
    CHECK(at_k.raw == doctest::Approx(8.0));
    CHECK(at_k.prob == 1.0);
    CHECK_THROWS_AS(bandit_bound(arms, gaps, 1), BudgetError);
    // strictly decreasing in n
    CHECK(bandit_bound(arms, gaps, 2000).raw < bandit_bound(arms, gaps, 1000).raw);
}

TEST_CASE("every bound evaluator is nonincreasing in the sample count") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        BoundConstants k = random_constants(rng);
        double prev_mse = 1e300, prev_tail = 1e300, prev_oce_mse = 1e300, prev_radius = 1e300,
               prev_sa = 1e300;
        for (const std::int64_t n : {10, 100, 1000, 10000}) {
            const double mse = minimizer_mse_bound(k, n);
            const double tail = minimizer_tail_bound(k, n, 0.5).raw;
            const double oce_mse = oce_mse_bound(k, n);
            const double rad = high_confidence_radius(k, n, 0.1);
            const double sa = sa_oce_bound(k, n);
            CHECK(mse <= prev_mse);
            CHECK(tail <= prev_tail + 1e-15);
            CHECK(oce_mse <= prev_oce_mse);
            CHECK(rad <= prev_radius);
            CHECK(sa <= prev_sa);
            prev_mse = mse;
            prev_tail = tail;
            prev_oce_mse = oce_mse;
            prev_radius = rad;
            prev_sa = sa;
        }
    }
}

TEST_CASE("empirical tails") {
    const LossModel model = NormalLoss(0.5, 25.0);
    const auto spec = DisutilitySpec::mean_variance(0.5);
    // eps = 0: every replication counts
    const EmpiricalTail all = empirical_tail(model, spec, 50, 0.0, 200, 11, TailTarget::minimizer);
    CHECK(all.frequency == 1.0);
    // constant model: zero frequency for any eps > 0
    const LossModel constant = CreditRiskModel({2.0}, {1.0}, {{1.0}});
    const EmpiricalTail none =
        empirical_tail(constant, spec, 50, 1e-6, 200, 11, TailTarget::oce);
    CHECK(none.frequency == 0.0);

    // pinned against the exact Gaussian tail of the sample mean
    const std::int64_t n = 1000;
    const double eps = 0.3;
    const EmpiricalTail tail = empirical_tail(model, spec, n, eps, 2000, 13, TailTarget::minimizer);
    const double exact = 2.0 * (1.0 - normal_cdf(eps * std::sqrt(static_cast<double>(n)) / 5.0));
    CHECK(std::fabs(tail.frequency - exact) <= 3.0 * tail.std_error + 1e-3);
    // dominated by the theoretical tail bound
    const BoundConstants k = example_constants();
    CHECK(tail.frequency <= minimizer_tail_bound(k, n, eps).prob + 3.0 * tail.std_error);
}

TEST_CASE("tau estimated by Monte Carlo matches the analytic value") {
    // mean-variance on N(0.5, 25): (1 - phi'(X - e*)) ~ N(0, 25), fourth
    // moment 3 * 625, so tau = 1875^(1/4)
    const double tau = estimate_tau(LossModel(NormalLoss(0.5, 25.0)),
                                    DisutilitySpec::mean_variance(0.5), 0.5, 400000, 21);
    CHECK(tau == doctest::Approx(std::pow(1875.0, 0.25)).epsilon(0.02));
    CHECK(estimate_tau(LossModel(CreditRiskModel({2.0}, {1.0}, {{1.0}})),
                       DisutilitySpec::mean_variance(0.5), 2.0, 1000, 3) ==
          doctest::Approx(0.0));
}

TEST_CASE("constants file round-trip") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "oce_constants_test.txt";
    {
        std::ofstream out(path);
        out << "# running example\n";
        out << "L=1\nmu=1\nsigma=5\ne_star=0.5\nmean_x=0.5\nsecond_moment_x=25.25\n";
        out << "var_phi=337.5\nvar_phi_prime=25\nfourth_phi_prime=2026\n";
    }
    const BoundConstants k = load_constants(path);
    CHECK(minimizer_mse_bound(k, 100) == doctest::Approx(0.25));
    CHECK(oce_mse_bound(k, 1000) ==
          doctest::Approx(oracles::mse_oce_bound(1.0, 1.0, 337.5, 25.0, 2026.0, 1000.0)));
    // tau was not supplied: K0 with M = 0 does not need it, but a missing
    // required field is loud
    CHECK_THROWS_AS(sa_k0(k), IncompleteConstantsError);
    {
        std::ofstream out(path);
        out << "unknown_key=1\n";
    }
    CHECK_THROWS_AS(load_constants(path), ParseError);
}
