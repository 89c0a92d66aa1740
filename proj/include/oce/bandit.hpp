#ifndef OCE_BANDIT_HPP
#define OCE_BANDIT_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "oce/disutility.hpp"
#include "oce/loss_models.hpp"

namespace oce {

/// Fixed-budget best-arm identification instance: K >= 2 loss models under
/// one shared disutility, with known true risks for scoring.
struct BanditInstance {
    std::vector<LossModel> arms;
    DisutilitySpec spec;
    std::vector<double> true_oce;

    /// Fills true_oce from closed forms (oracle fallback) and validates
    /// K >= 2.
    static BanditInstance make(std::vector<LossModel> arms, const DisutilitySpec& spec,
                               std::uint64_t oracle_seed = 0x7ac7);
};

/// 0.5 + sum_{i=2..K} 1/i.
double sr_log_bar(int num_arms);

/// Cumulative successive-rejects pull targets n_1 <= ... <= n_{K-1} with
/// n_k = ceil((n - K) / (log_bar(K) (K + 1 - k))); phase k pulls every
/// surviving arm n_k - n_{k-1} fresh times. BudgetError unless n > K >= 2.
std::vector<std::int64_t> sr_schedule(int num_arms, std::int64_t budget);

struct SrResult {
    int chosen = -1;
    std::vector<std::pair<int, int>> eliminations; // (phase, arm), one per phase
    std::vector<std::int64_t> pulls;               // per-arm totals
    std::int64_t total_pulls = 0;
};

/// Runs the K-1 elimination phases: every surviving arm accumulates the
/// phase pulls, its risk is re-estimated from all of its samples so far,
/// and the arm with the largest empirical risk is removed (ties broken
/// toward the smallest index). Per-arm sample streams are derived from
/// (seed, arm index), so eliminations never perturb the other arms' paths.
SrResult run_oce_sr(const BanditInstance& instance, std::int64_t budget, std::uint64_t seed);

/// Same, with explicit per-arm stream seeds (one per arm).
SrResult run_oce_sr(const BanditInstance& instance, std::int64_t budget,
                    std::span<const std::uint64_t> arm_seeds);

struct MisidEstimate {
    double rate = 0.0;
    double std_error = 0.0;
    int reps = 0;
};

/// Fraction of replications whose chosen arm is not the true best;
/// replication r runs on seed base_seed + r.
MisidEstimate misid_rate(const BanditInstance& instance, std::int64_t budget, int reps,
                         std::uint64_t seed);

/// Risk gaps of the arms sorted by true risk and the hardness constant
/// H = max_i i / min{gap_i/2, gap_i^2/4}. gaps[0] belongs to the best arm
/// and is set to gaps[1] by convention (its own gap is undefined).
/// NonUniqueOptimumError when the best risk is tied.
struct HardnessResult {
    std::vector<double> gaps;
    double h = 0.0;
};
HardnessResult hardness(const BanditInstance& instance);

/// Instance file: one "phi=<spec>" line plus one "arm=<model path>" line
/// per arm, paths relative to the instance file.
BanditInstance load_instance(const std::filesystem::path& path);

} // namespace oce

#endif
