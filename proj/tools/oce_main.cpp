// oce — OCE risk estimation toolkit command line.
//
// Subcommands: batch, stream, bounds, bandit, experiment. Every command is
// deterministic under its --seed: rerunning with identical flags produces
// byte-identical CSV output.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "oce/bandit.hpp"
#include "oce/batch_estimator.hpp"
#include "oce/bounds.hpp"
#include "oce/csv.hpp"
#include "oce/disutility.hpp"
#include "oce/errors.hpp"
#include "oce/harness.hpp"
#include "oce/loss_models.hpp"
#include "oce/numeric.hpp"
#include "oce/parallel.hpp"
#include "oce/streaming_estimator.hpp"

namespace {

std::vector<std::int64_t> parse_int_list(const std::string& text) {
    std::vector<std::int64_t> out;
    std::istringstream is(text);
    std::string item;
    while (std::getline(is, item, ',')) out.push_back(std::stoll(item));
    return out;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::istringstream is(text);
    std::string item;
    while (std::getline(is, item, ',')) out.push_back(std::stod(item));
    return out;
}

int run_batch(const std::string& model_path, const std::string& phi, std::int64_t n, int reps,
              std::uint64_t seed, const std::string& out_path, double tol) {
    const oce::LossModel model = oce::load_model(model_path);
    const oce::DisutilitySpec spec = oce::DisutilitySpec::parse(phi);
    const oce::RiskPoint truth = oce::reference_risk(model, spec, seed);

    oce::CsvFile csv(out_path, seed, {"n", "rep", "e_hat", "oce_hat", "err_e", "err_oce"},
                     {"model " + oce::model_tag(model), "phi " + spec.format(),
                      "truth e_star " + oce::csv_num(truth.minimizer) + " oce " +
                          oce::csv_num(truth.risk)});
    std::vector<oce::BatchEstimate> results(static_cast<std::size_t>(reps));
    oce::parallel_for(reps, [&](std::int64_t r) {
        const oce::SampleBatch batch = oce::sample(model, n, seed + static_cast<std::uint64_t>(r));
        results[static_cast<std::size_t>(r)] = oce::estimate_oce(batch.values, spec, tol);
    });
    for (int r = 0; r < reps; ++r) {
        const auto& est = results[static_cast<std::size_t>(r)];
        csv.row({oce::csv_num(n), oce::csv_num(static_cast<std::int64_t>(r)),
                 oce::csv_num(est.e_hat), oce::csv_num(est.oce_hat),
                 oce::csv_num(est.e_hat - truth.minimizer),
                 oce::csv_num(est.oce_hat - truth.risk)});
    }
    return 0;
}

int run_stream(const std::string& model_path, const std::string& phi, std::int64_t m, double b,
               double alpha, double t0, double gamma_max, int reps, std::uint64_t seed,
               const std::string& checkpoints_text, const std::string& out_path) {
    const oce::LossModel model = oce::load_model(model_path);
    const oce::DisutilitySpec spec = oce::DisutilitySpec::parse(phi);
    const oce::RiskPoint truth = oce::reference_risk(model, spec, seed);
    std::vector<std::int64_t> checkpoints =
        checkpoints_text.empty() ? std::vector<std::int64_t>{m} : parse_int_list(checkpoints_text);
    for (std::size_t i = 1; i < checkpoints.size(); ++i) {
        if (checkpoints[i] <= checkpoints[i - 1]) {
            throw oce::DomainError("--checkpoints must be strictly increasing");
        }
    }
    if (checkpoints.back() > m) throw oce::DomainError("checkpoints must not exceed --m");

    const oce::StepSchedule schedule{b, alpha, gamma_max};
    schedule.validate();
    oce::CsvFile csv(out_path, seed, {"m", "rep", "t_bar", "oce_sa", "err_t", "err_oce"},
                     {"model " + oce::model_tag(model), "phi " + spec.format(),
                      "steps min(b/j^alpha, gamma_max) b " + oce::csv_num(b) + " alpha " +
                          oce::csv_num(alpha) + " gamma_max " + oce::csv_num(gamma_max) +
                          " t0 " + oce::csv_num(t0),
                      "truth e_star " + oce::csv_num(truth.minimizer) + " oce " +
                          oce::csv_num(truth.risk)});
    std::vector<oce::StreamTrace> traces(static_cast<std::size_t>(reps));
    oce::parallel_for(reps, [&](std::int64_t r) {
        traces[static_cast<std::size_t>(r)] = oce::stream_trace(
            model, spec, schedule, t0, checkpoints, seed + static_cast<std::uint64_t>(r));
    });
    for (int r = 0; r < reps; ++r) {
        const auto& trace = traces[static_cast<std::size_t>(r)];
        for (std::size_t c = 0; c < checkpoints.size(); ++c) {
            csv.row({oce::csv_num(checkpoints[c]), oce::csv_num(static_cast<std::int64_t>(r)),
                     oce::csv_num(trace.t_bar[c]), oce::csv_num(trace.oce_sa[c]),
                     oce::csv_num(trace.t_bar[c] - truth.minimizer),
                     oce::csv_num(trace.oce_sa[c] - truth.risk)});
        }
    }
    return 0;
}

int run_bounds(const std::string& which, const std::vector<std::string>& constants_paths,
               const std::string& n_text, const std::string& eps_text,
               const std::string& delta_text, const std::string& gaps_text,
               const std::string& out_path, std::uint64_t seed) {
    if (constants_paths.empty()) throw oce::DomainError("--constants is required");
    std::vector<oce::BoundConstants> constants;
    for (const auto& p : constants_paths) constants.push_back(oce::load_constants(p));
    const oce::BoundConstants& k = constants.front();
    const std::vector<std::int64_t> ns = parse_int_list(n_text);

    if (which == "mse-min" || which == "mse-oce" || which == "k0" || which == "sa-oce") {
        oce::CsvFile csv(out_path, seed, {"which", "n", "value"}, {});
        for (const std::int64_t n : ns) {
            double value = 0.0;
            if (which == "mse-min") value = oce::minimizer_mse_bound(k, n);
            if (which == "mse-oce") value = oce::oce_mse_bound(k, n);
            if (which == "k0") value = oce::sa_k0(k);
            if (which == "sa-oce") value = oce::sa_oce_bound(k, n);
            csv.row({which, oce::csv_num(n), oce::csv_num(value)});
        }
        return 0;
    }
    if (which == "conc-min" || which == "conc-oce") {
        if (eps_text.empty()) throw oce::DomainError("--eps is required for " + which);
        const std::vector<double> eps_list = parse_double_list(eps_text);
        oce::CsvFile csv(out_path, seed, {"which", "n", "eps", "raw", "prob"}, {});
        for (const std::int64_t n : ns) {
            for (const double eps : eps_list) {
                const oce::TailBound bound = which == "conc-min"
                                                 ? oce::minimizer_tail_bound(k, n, eps)
                                                 : oce::oce_tail_bound(k, n, eps);
                csv.row({which, oce::csv_num(n), oce::csv_num(eps), oce::csv_num(bound.raw),
                         oce::csv_num(bound.prob)});
            }
        }
        return 0;
    }
    if (which == "radius") {
        if (delta_text.empty()) throw oce::DomainError("--delta is required for radius");
        const std::vector<double> deltas = parse_double_list(delta_text);
        oce::CsvFile csv(out_path, seed, {"which", "n", "delta", "radius"}, {});
        for (const std::int64_t n : ns) {
            for (const double delta : deltas) {
                csv.row({which, oce::csv_num(n), oce::csv_num(delta),
                         oce::csv_num(oce::high_confidence_radius(k, n, delta))});
            }
        }
        return 0;
    }
    if (which == "bandit") {
        if (gaps_text.empty()) throw oce::DomainError("--gaps is required for bandit");
        // gaps: ascending risk gaps of arms 2..K; arm 1 carries gap[2] by
        // convention. One constants file is shared across arms unless K
        // files are given.
        const std::vector<double> rest = parse_double_list(gaps_text);
        std::vector<double> gaps;
        gaps.push_back(rest.front());
        gaps.insert(gaps.end(), rest.begin(), rest.end());
        std::vector<oce::BoundConstants> arms = constants;
        if (arms.size() == 1) arms.assign(gaps.size(), constants.front());
        if (arms.size() != gaps.size()) {
            throw oce::DomainError("--constants must appear once or once per arm");
        }
        oce::CsvFile csv(out_path, seed, {"which", "n", "k_arms", "raw", "prob"}, {});
        for (const std::int64_t n : ns) {
            const oce::TailBound bound = oce::bandit_bound(arms, gaps, n);
            csv.row({which, oce::csv_num(n),
                     oce::csv_num(static_cast<std::int64_t>(gaps.size())),
                     oce::csv_num(bound.raw), oce::csv_num(bound.prob)});
        }
        return 0;
    }
    throw oce::DomainError("unknown --which '" + which + "'");
}

int run_bandit_cmd(const std::string& instance_path, std::int64_t n, int reps,
                   std::uint64_t seed, const std::string& out_path) {
    const oce::BanditInstance instance = oce::load_instance(instance_path);
    const int best = static_cast<int>(std::distance(
        instance.true_oce.begin(),
        std::min_element(instance.true_oce.begin(), instance.true_oce.end())));

    std::vector<oce::SrResult> runs(static_cast<std::size_t>(reps));
    oce::parallel_for(reps, [&](std::int64_t r) {
        runs[static_cast<std::size_t>(r)] =
            oce::run_oce_sr(instance, n, seed + static_cast<std::uint64_t>(r));
    });
    oce::CsvFile csv(out_path, seed, {"n", "rep", "chosen", "correct"},
                     {"phi " + instance.spec.format(),
                      "arms " + std::to_string(instance.arms.size()) + ", best " +
                          std::to_string(best)});
    int correct = 0;
    for (int r = 0; r < reps; ++r) {
        const bool ok = runs[static_cast<std::size_t>(r)].chosen == best;
        correct += ok ? 1 : 0;
        csv.row({oce::csv_num(n), oce::csv_num(static_cast<std::int64_t>(r)),
                 oce::csv_num(static_cast<std::int64_t>(runs[static_cast<std::size_t>(r)].chosen)),
                 ok ? "1" : "0"});
    }
    // Summary row: rep = -1 carries the identification rate.
    csv.row({oce::csv_num(n), oce::csv_num(static_cast<std::int64_t>(-1)),
             oce::csv_num(static_cast<std::int64_t>(best)),
             oce::csv_num(static_cast<double>(correct) / static_cast<double>(reps))});
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"OCE risk estimation toolkit"};
    app.require_subcommand(1);

    // batch
    auto* batch = app.add_subcommand("batch", "sample-average estimation study");
    std::string batch_model, batch_phi, batch_out;
    std::int64_t batch_n = 1000;
    int batch_reps = 1;
    std::uint64_t batch_seed = 42;
    double batch_tol = 1e-10;
    batch->add_option("--model", batch_model, "model file")->required();
    batch->add_option("--phi", batch_phi, "disutility spec")->required();
    batch->add_option("--n", batch_n, "samples per replication")->required();
    batch->add_option("--reps", batch_reps, "replications");
    batch->add_option("--seed", batch_seed, "base seed");
    batch->add_option("--tol", batch_tol, "solver tolerance");
    batch->add_option("--out", batch_out, "output CSV")->required();

    // stream
    auto* stream = app.add_subcommand("stream", "stochastic-approximation estimation study");
    std::string stream_model, stream_phi, stream_out, stream_checkpoints;
    std::int64_t stream_m = 5000;
    double stream_b = 10.0, stream_alpha = 0.6, stream_t0 = 1.0;
    double stream_gamma_max = std::numeric_limits<double>::infinity();
    int stream_reps = 1;
    std::uint64_t stream_seed = 42;
    stream->add_option("--model", stream_model, "model file")->required();
    stream->add_option("--phi", stream_phi, "disutility spec")->required();
    stream->add_option("--m", stream_m, "stream length")->required();
    stream->add_option("--b", stream_b, "step scale b");
    stream->add_option("--alpha", stream_alpha, "step exponent alpha");
    stream->add_option("--t0", stream_t0, "initial iterate");
    stream->add_option("--gamma-max", stream_gamma_max, "step clip (default: none)");
    stream->add_option("--reps", stream_reps, "replications");
    stream->add_option("--seed", stream_seed, "base seed");
    stream->add_option("--checkpoints", stream_checkpoints, "read-out points, e.g. 100,500,1000");
    stream->add_option("--out", stream_out, "output CSV")->required();

    // bounds
    auto* bounds = app.add_subcommand("bounds", "evaluate theoretical bounds");
    std::string bounds_which, bounds_n, bounds_eps, bounds_delta, bounds_gaps, bounds_out;
    std::vector<std::string> bounds_constants;
    std::uint64_t bounds_seed = 42;
    bounds
        ->add_option("--which", bounds_which,
                     "mse-min|conc-min|mse-oce|conc-oce|radius|k0|sa-oce|bandit")
        ->required();
    bounds->add_option("--constants", bounds_constants, "key=value constants file")->required();
    bounds->add_option("--n", bounds_n, "sample sizes (comma list)")->required();
    bounds->add_option("--eps", bounds_eps, "deviations (comma list)");
    bounds->add_option("--delta", bounds_delta, "confidence levels (comma list)");
    bounds->add_option("--gaps", bounds_gaps, "risk gaps of arms 2..K (comma list)");
    bounds->add_option("--seed", bounds_seed, "seed recorded in the CSV header");
    bounds->add_option("--out", bounds_out, "output CSV")->required();

    // bandit
    auto* bandit = app.add_subcommand("bandit", "successive-rejects identification study");
    std::string bandit_instance, bandit_out;
    std::int64_t bandit_n = 1000;
    int bandit_reps = 1;
    std::uint64_t bandit_seed = 42;
    bandit->add_option("--instance", bandit_instance, "instance file")->required();
    bandit->add_option("--n", bandit_n, "sampling budget")->required();
    bandit->add_option("--reps", bandit_reps, "replications");
    bandit->add_option("--seed", bandit_seed, "base seed");
    bandit->add_option("--out", bandit_out, "output CSV")->required();

    // experiment
    auto* experiment = app.add_subcommand("experiment", "run a named experiment");
    std::string exp_name, exp_outdir = ".", exp_grid;
    std::vector<std::string> exp_overrides;
    int exp_reps = 1000;
    std::uint64_t exp_seed = 42;
    experiment
        ->add_option("--name", exp_name,
                     "fig1_batch_normal|fig2_stream_normal|fig3_credit|bound_dominance|"
                     "bandit_study")
        ->required();
    experiment->add_option("--reps", exp_reps, "replications");
    experiment->add_option("--seed", exp_seed, "base seed");
    experiment->add_option("--outdir", exp_outdir, "output directory");
    experiment->add_option("--grid", exp_grid, "sample-size grid override (comma list)");
    experiment->add_option("--set", exp_overrides, "experiment override key=value");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*batch) {
            return run_batch(batch_model, batch_phi, batch_n, batch_reps, batch_seed, batch_out,
                             batch_tol);
        }
        if (*stream) {
            return run_stream(stream_model, stream_phi, stream_m, stream_b, stream_alpha,
                              stream_t0, stream_gamma_max, stream_reps, stream_seed,
                              stream_checkpoints, stream_out);
        }
        if (*bounds) {
            return run_bounds(bounds_which, bounds_constants, bounds_n, bounds_eps, bounds_delta,
                              bounds_gaps, bounds_out, bounds_seed);
        }
        if (*bandit) {
            return run_bandit_cmd(bandit_instance, bandit_n, bandit_reps, bandit_seed, bandit_out);
        }
        if (*experiment) {
            oce::ExperimentConfig config;
            config.name = exp_name;
            config.reps = exp_reps;
            config.seed = exp_seed;
            config.outdir = exp_outdir;
            if (!exp_grid.empty()) config.grid = parse_int_list(exp_grid);
            for (const auto& kv : exp_overrides) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) {
                    throw oce::DomainError("--set expects key=value, got '" + kv + "'");
                }
                config.overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
            }
            const oce::ExperimentResult result = oce::run_experiment(config);
            for (const auto& check : result.checks) {
                std::cout << (check.passed ? "[ok]   " : "[FAIL] ") << config.name << ": "
                          << check.name << " (" << check.measured << " " << check.relation << " "
                          << check.required << ")\n";
            }
            return result.passed ? 0 : 1;
        }
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
    return 0;
}
