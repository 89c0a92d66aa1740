#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "oce/csv.hpp"
#include "oce/errors.hpp"
#include "oce/harness.hpp"

using namespace oce;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("csv formatting round-trips doubles") {
    CHECK(csv_num(0.1) == "0.10000000000000001");
    CHECK(csv_num(static_cast<std::int64_t>(42)) == "42");
    CHECK(std::stod(csv_num(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("csv files carry the seed comment and a header row") {
    const fs::path dir = fs::temp_directory_path() / "oce_csv_test";
    fs::create_directories(dir);
    const fs::path path = dir / "t.csv";
    {
        CsvFile csv(path, 123, {"a", "b"}, {"note"});
        csv.row({"1", "2"});
        CHECK_THROWS(csv.row({"1"}));
    }
    const std::string text = slurp(path);
    CHECK(text.rfind("# seed=123 version=", 0) == 0);
    CHECK(text.find("# note\n") != std::string::npos);
    CHECK(text.find("a,b\n") != std::string::npos);
    CHECK(text.find("1,2\n") != std::string::npos);
}

TEST_CASE("experiments run small, deterministically, and write summaries") {
    const fs::path dir_a = fs::temp_directory_path() / "oce_exp_a";
    const fs::path dir_b = fs::temp_directory_path() / "oce_exp_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);

    ExperimentConfig config;
    config.reps = 20;
    config.seed = 5;

    for (const std::string& name : experiment_names()) {
        config.name = name;
        if (name == "fig1_batch_normal") config.grid = {100, 316};
        else if (name == "fig2_stream_normal" || name == "fig3_credit") config.grid = {100, 500};
        else if (name == "bound_dominance") config.grid = {100};
        else config.grid = {200, 400};

        config.outdir = dir_a;
        const ExperimentResult first = run_experiment(config);
        REQUIRE_FALSE(first.files.empty());
        REQUIRE_FALSE(first.checks.empty());

        config.outdir = dir_b;
        run_experiment(config);

        for (const auto& file : first.files) {
            const std::string name_only = file.filename().string();
            CHECK(slurp(dir_a / name_only) == slurp(dir_b / name_only));
        }
        const auto summary =
            nlohmann::json::parse(slurp(dir_a / (name + "_summary.json")));
        CHECK(summary["experiment"] == name);
        CHECK(summary["checks"].is_array());
        CHECK_FALSE(summary["checks"].empty());
    }
}

TEST_CASE("unknown experiment is rejected") {
    ExperimentConfig config;
    config.name = "fig9";
    CHECK_THROWS_AS(run_experiment(config), DomainError);
}

TEST_CASE("non-increasing grids are rejected") {
    ExperimentConfig config;
    config.name = "fig1_batch_normal";
    config.reps = 1;
    config.grid = {100, 100};
    CHECK_THROWS_AS(run_experiment(config), DomainError);
    config.reps = 0;
    config.grid = {100, 200};
    CHECK_THROWS_AS(run_experiment(config), DomainError);
}

TEST_CASE("sub-operation failures abort with the failing coordinate") {
    // raw (unclipped) credit schedule from a far-out start overflows the
    // iterate within a few steps; the error must name the experiment and
    // the replication
    ExperimentConfig config;
    config.name = "fig3_credit";
    config.reps = 2;
    config.seed = 1;
    config.grid = {5000};
    config.overrides["alphas"] = "0.6";
    config.overrides["gamma_max"] = "inf";
    config.overrides["t0"] = "1e300";
    config.outdir = fs::temp_directory_path() / "oce_fig3_diverge";
    try {
        run_experiment(config);
        CHECK(false);
    } catch (const Error& err) {
        const std::string msg = err.what();
        CHECK(msg.find("fig3_credit") != std::string::npos);
        CHECK(msg.find("rep") != std::string::npos);
        CHECK(msg.find("finite range") != std::string::npos);
    }
}

TEST_CASE("worker count does not change results") {
    const fs::path dir_one = fs::temp_directory_path() / "oce_threads_one";
    const fs::path dir_many = fs::temp_directory_path() / "oce_threads_many";
    fs::remove_all(dir_one);
    fs::remove_all(dir_many);
    ExperimentConfig config;
    config.name = "fig1_batch_normal";
    config.reps = 30;
    config.seed = 11;
    config.grid = {100, 1000};

    setenv("OCE_THREADS", "1", 1);
    config.outdir = dir_one;
    run_experiment(config);
    setenv("OCE_THREADS", "4", 1);
    config.outdir = dir_many;
    run_experiment(config);
    unsetenv("OCE_THREADS");

    CHECK(slurp(dir_one / "fig1_batch_normal.csv") == slurp(dir_many / "fig1_batch_normal.csv"));
}

TEST_CASE("credit stream regression pin") {
    // Frozen read-out of the fig3 configuration at a small replication
    // count; guards the sampling order, the schedule and the two-pass
    // finalization against silent drift. Reference value produced by this
    // implementation at seed 42 and cross-checked against the analytic
    // risk level.
    const fs::path dir = fs::temp_directory_path() / "oce_fig3_pin";
    fs::remove_all(dir);
    ExperimentConfig config;
    config.name = "fig3_credit";
    config.reps = 50;
    config.seed = 42;
    config.grid = {100, 5000};
    config.overrides["alphas"] = "0.6";
    config.outdir = dir;
    run_experiment(config);
    const std::string text = slurp(dir / "fig3_credit.csv");
    // last row: m=5000 line of the single alpha
    const auto pos = text.rfind("\n5000,");
    REQUIRE(pos != std::string::npos);
    std::istringstream row(text.substr(pos + 1));
    std::string cell;
    std::vector<double> cells;
    while (std::getline(row, cell, ',')) cells.push_back(std::stod(cell));
    REQUIRE(cells.size() == 6);
    const double mse_tbar = cells[2];
    const double mae_oce = cells[3];
    CHECK(mse_tbar == doctest::Approx(0.00083303623855159991).epsilon(1e-9));
    CHECK(mae_oce == doctest::Approx(0.086804034339139691).epsilon(1e-9));
}
