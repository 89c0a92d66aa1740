#ifndef OCE_HARNESS_HPP
#define OCE_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "oce/bandit.hpp"
#include "oce/streaming_estimator.hpp"

namespace oce {

/// Named experiment drivers. Each writes its CSV artifacts plus a
/// summary.json with pass/fail for its embedded checks into outdir.
///   fig1_batch_normal   batch estimator on N(0.5, 25), mean-variance c=0.5,
///                       across the log-spaced grid
///   fig2_stream_normal  streaming estimator, steps 10/j^alpha,
///                       alpha in {0.6, 0.8}, t0 = 1
///   fig3_credit         streaming estimator on the bundled credit
///                       portfolio, steps 100/j^alpha clipped at 1/L
///   bound_dominance     empirical tail frequencies against the
///                       theoretical tail bounds over the (n, eps) grid
///   bandit_study        successive rejects on the five-arm normal
///                       instance, with the mis-identification bound
struct ExperimentConfig {
    std::string name;
    int reps = 1000;
    std::uint64_t seed = 42;
    std::filesystem::path outdir = ".";
    std::vector<std::int64_t> grid;              // optional grid override
    std::map<std::string, std::string> overrides; // experiment-specific knobs
};

struct CheckResult {
    std::string name;
    double measured = 0.0;
    double required = 0.0;
    std::string relation; // "<=", ">=", "==" (descriptive)
    bool passed = false;
};

struct ExperimentResult {
    bool passed = false;
    std::vector<std::filesystem::path> files;
    std::vector<CheckResult> checks;
};

const std::vector<std::string>& experiment_names();

ExperimentResult run_experiment(const ExperimentConfig& config);

/// One streaming run over a fresh sample path with read-outs of the
/// averaged iterate and the finalized risk at each checkpoint
/// (checkpoints ascending).
struct StreamTrace {
    std::vector<double> t_bar;
    std::vector<double> oce_sa;
};
StreamTrace stream_trace(const LossModel& model, const DisutilitySpec& spec,
                         const StepSchedule& schedule, double t0,
                         std::span<const std::int64_t> checkpoints, std::uint64_t seed);

/// The five-arm study instance: N(0.5 + i, 25) for i = 0..4 under
/// mean-variance c = 0.5, true risks 13..17.
BanditInstance five_arm_instance();

} // namespace oce

#endif
