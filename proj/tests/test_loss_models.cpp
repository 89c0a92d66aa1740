#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "oce/disutility.hpp"
#include "oce/errors.hpp"
#include "oce/loss_models.hpp"
#include "oce/normal.hpp"
#include "oce/numeric.hpp"

using namespace oce;

TEST_CASE("normal quantile") {
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(normal_quantile(0.95) == doctest::Approx(1.6448536269514722).epsilon(1e-9));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-9));
    // inverse relation to ~1e-9 across the range
    for (double p : {1e-6, 0.01, 0.2, 0.5, 0.8, 0.99, 1 - 1e-6}) {
        CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-9));
    }
    CHECK_THROWS_AS(normal_quantile(0.0), DomainError);
    CHECK_THROWS_AS(normal_quantile(1.0), DomainError);
}

TEST_CASE("seed determinism is bit-exact") {
    for (const LossModel& model :
         {LossModel(NormalLoss(0.5, 25.0)), LossModel(credit_portfolio_25())}) {
        const SampleBatch a = sample(model, 5000, 99);
        const SampleBatch b = sample(model, 5000, 99);
        REQUIRE(a.values.size() == b.values.size());
        for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);
        const SampleBatch c = sample(model, 5000, 100);
        CHECK(a.values != c.values);
    }
}

TEST_CASE("sampler matches batches drawn one at a time") {
    const LossModel model = credit_portfolio_25();
    const SampleBatch batch = sample(model, 200, 7);
    LossSampler sampler(model, 7);
    for (double v : batch.values) CHECK(sampler.next() == v);
}

TEST_CASE("normal sample mean at CLT scale") {
    const SampleBatch batch = sample(NormalLoss(0.5, 25.0), 1000000, 4242);
    CHECK(std::fabs(mean_of(batch.values) - 0.5) <= 0.02);
}

TEST_CASE("credit portfolio basics") {
    const CreditRiskModel credit = credit_portfolio_25();
    CHECK(credit.positions() == 25);
    CHECK(credit.factors() == 6);
    CHECK(credit.max_loss() == doctest::Approx(37.5));

    const auto r = credit_thresholds(credit);
    for (double ri : r) CHECK(ri == doctest::Approx(1.6448536269514722).epsilon(1e-9));

    // per-position empirical default rate over 1e6 draws
    const SampleBatch batch = sample(LossModel(credit), 1000000, 77);
    CHECK(std::fabs(mean_of(batch.values) - 1.875) <= 0.01);
}

TEST_CASE("certain default is a constant loss") {
    const CreditRiskModel degenerate({1.0, 2.0}, {1.0, 1.0}, {{1.0, 0.0}, {1.0, 0.0}});
    const SampleBatch batch = sample(LossModel(degenerate), 500, 5);
    for (double v : batch.values) CHECK(v == doctest::Approx(3.0));
    const Moments mom = moments(LossModel(degenerate));
    CHECK(mom.mean == doctest::Approx(3.0));
    CHECK(mom.variance == doctest::Approx(0.0));
}

TEST_CASE("per-position default frequency") {
    const CreditRiskModel credit = credit_portfolio_25();
    const std::vector<double> r = credit_thresholds(credit);
    // regenerate defaults directly to count per position
    SplitMix64 rng(31337);
    const int n = 1000000;
    std::vector<int> defaults(credit.positions(), 0);
    std::vector<double> z(credit.factors());
    for (int draw = 0; draw < n; ++draw) {
        for (auto& zi : z) zi = rng.next_normal();
        for (std::size_t i = 0; i < credit.positions(); ++i) {
            const auto& row = credit.coupling_rows()[i];
            double latent = row[0] * rng.next_normal();
            for (std::size_t j = 0; j < z.size(); ++j) latent += row[j + 1] * z[j];
            if (latent > r[i]) defaults[i] += 1;
        }
    }
    for (std::size_t i = 0; i < credit.positions(); ++i) {
        CHECK(std::fabs(static_cast<double>(defaults[i]) / n - 0.05) <= 0.002);
    }
}

TEST_CASE("row norm violations are rejected at construction") {
    const std::vector<double> v = {1.0, 1.0};
    const std::vector<double> p = {0.5, 0.5};
    const std::vector<double> good_row = {std::sqrt(0.99), 0.1};
    CHECK_THROWS_AS(CreditRiskModel(v, p, {{0.9, 0.1}, good_row}), DomainError);
    CHECK_NOTHROW(CreditRiskModel(v, p, {good_row, good_row}));
    CHECK_THROWS_AS(CreditRiskModel(v, p, {{std::sqrt(0.99) + 1e-9, 0.1}, good_row}),
                    DomainError);
    CHECK_THROWS_AS(CreditRiskModel(v, {0.5, 1.5}, {good_row, good_row}), DomainError);
    CHECK_THROWS_AS(CreditRiskModel(v, p, {{-std::sqrt(0.99), 0.1}, good_row}), DomainError);
    // d < m is required
    CHECK_THROWS_AS(CreditRiskModel({1.0}, {0.5}, {{std::sqrt(0.98), 0.1, 0.1}}), DomainError);
}

TEST_CASE("moments: normal and credit") {
    const Moments normal = moments(LossModel(NormalLoss(0.5, 25.0)));
    CHECK(normal.mean == doctest::Approx(0.5));
    CHECK(normal.variance == doctest::Approx(25.0));
    CHECK(normal.second_moment == doctest::Approx(25.25));
    CHECK(normal.exact);

    const CreditRiskModel credit = credit_portfolio_25();
    const Moments mom = moments(LossModel(credit));
    CHECK(mom.mean == doctest::Approx(1.875).epsilon(1e-12));

    // The independent-defaults basis reproduces the published reference,
    // mean + c * var giving 3.28515625 at c = 0.5.
    CHECK(independent_default_variance(credit) == doctest::Approx(2.8203125).epsilon(1e-12));

    // The factor couplings correlate defaults, so the true variance sits
    // strictly above the independent-defaults value; cross-check the
    // quadrature against Monte Carlo.
    CHECK(mom.variance > 2.82);
    const SampleBatch batch = sample(LossModel(credit), 2000000, 991);
    const double m1 = mean_of(batch.values);
    std::vector<double> centered_sq(batch.values.size());
    for (std::size_t i = 0; i < batch.values.size(); ++i) {
        centered_sq[i] = (batch.values[i] - m1) * (batch.values[i] - m1);
    }
    const double mc_var = mean_of(centered_sq);
    const double mc_se = standard_error(centered_sq);
    CHECK(std::fabs(mom.variance - mc_var) <= 4.0 * mc_se);

    // zero-loss portfolio
    const CreditRiskModel zero({0.0, 0.0}, {0.5, 0.5}, {{1.0, 0.0}, {1.0, 0.0}});
    const Moments zmom = moments(LossModel(zero));
    CHECK(zmom.mean == 0.0);
    CHECK(zmom.variance == 0.0);
    CHECK(zmom.second_moment == 0.0);
}

TEST_CASE("credit_thresholds rejects certain defaults") {
    const CreditRiskModel degenerate({1.0}, {1.0}, {{1.0}});
    CHECK_THROWS_AS(credit_thresholds(degenerate), DomainError);
}

TEST_CASE("oracle_oce") {
    const auto spec = DisutilitySpec::mean_variance(0.5);
    const OracleRisk normal = oracle_oce(NormalLoss(0.5, 25.0), spec, 1000000, 12);
    CHECK(std::fabs(normal.oce_hat - 13.0) <= 0.05);
    CHECK(std::fabs(normal.e_star_hat - 0.5) <= 0.05);
    CHECK(normal.std_error > 0.0);
    CHECK(normal.std_error < 0.1);

    // consistency on a constant model, for every solvable family
    const LossModel constant = CreditRiskModel({2.5}, {1.0}, {{1.0}});
    for (const auto& s : {DisutilitySpec::mean_variance(0.5), DisutilitySpec::entropic(1.0),
                          DisutilitySpec::cvar(0.9)}) {
        const OracleRisk c = oracle_oce(constant, s, 100000, 3);
        CHECK(c.e_star_hat == doctest::Approx(2.5).epsilon(1e-8));
        CHECK(c.oce_hat == doctest::Approx(2.5).epsilon(1e-8));
    }

    // The credit oracle lands on the quadrature truth (correlated
    // defaults), visibly above the independent-defaults reference.
    const CreditRiskModel credit = credit_portfolio_25();
    const Moments mom = moments(LossModel(credit));
    const double true_oce = mom.mean + 0.5 * mom.variance;
    const double reference = mom.mean + 0.5 * independent_default_variance(credit);
    const OracleRisk cr = oracle_oce(LossModel(credit), spec, 1000000, 8);
    CHECK(std::fabs(cr.oce_hat - true_oce) <= 0.02);
    CHECK(cr.oce_hat - reference > 0.05);
}

TEST_CASE("oracle agrees with the closed form within Monte-Carlo error") {
    const auto spec = DisutilitySpec::mean_variance(0.5);
    const LossModel model = NormalLoss(0.5, 25.0);
    const RiskPoint exact = closed_form_risk(spec, model);
    const OracleRisk oracle = oracle_oce(model, spec, 400000, 55);
    CHECK(std::fabs(oracle.oce_hat - exact.risk) <= 3.0 * oracle.std_error);
}

TEST_CASE("model files round-trip and the bundled fixture matches the builtin") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "oce_model_roundtrip";
    fs::create_directories(dir);

    const LossModel normal = NormalLoss(0.5, 25.0);
    save_model(normal, dir / "normal.model");
    const LossModel normal2 = load_model(dir / "normal.model");
    CHECK(std::get<NormalLoss>(normal2).mean == 0.5);
    CHECK(std::get<NormalLoss>(normal2).variance == 25.0);

    const CreditRiskModel credit = credit_portfolio_25();
    save_model(LossModel(credit), dir / "credit.model");
    const auto credit2 = std::get<CreditRiskModel>(load_model(dir / "credit.model"));
    CHECK(credit2.positions() == credit.positions());
    for (std::size_t i = 0; i < credit.positions(); ++i) {
        CHECK(credit2.fractional_loss()[i] == credit.fractional_loss()[i]);
        CHECK(credit2.default_probability()[i] == credit.default_probability()[i]);
        for (std::size_t j = 0; j <= credit.factors(); ++j) {
            CHECK(credit2.coupling_rows()[i][j] == credit.coupling_rows()[i][j]);
        }
    }
    // identical draws through the file round-trip
    const SampleBatch a = sample(LossModel(credit), 100, 1);
    const SampleBatch b = sample(LossModel(credit2), 100, 1);
    CHECK(a.values == b.values);

    CHECK_THROWS_AS(load_model(dir / "missing.model"), ParseError);
}

TEST_CASE("bundled fixture files match the builtin models") {
    const std::filesystem::path data_dir(OCE_DATA_DIR);
    const LossModel credit = load_model(data_dir / "credit_portfolio_25.model");
    const SampleBatch from_file = sample(credit, 200, 31);
    const SampleBatch from_builtin = sample(LossModel(credit_portfolio_25()), 200, 31);
    CHECK(from_file.values == from_builtin.values);

    const LossModel normal = load_model(data_dir / "normal_half_25.model");
    CHECK(std::get<NormalLoss>(normal).mean == 0.5);
    CHECK(std::get<NormalLoss>(normal).variance == 25.0);
}

TEST_CASE("argument validation on sampling entry points") {
    const LossModel model = NormalLoss(0.0, 1.0);
    CHECK_THROWS_AS(sample(model, 0, 1), DomainError);
    CHECK_THROWS_AS(oracle_oce(model, DisutilitySpec::mean_variance(1.0), 0, 1), DomainError);
}
