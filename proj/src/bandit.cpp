#include "oce/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "oce/batch_estimator.hpp"
#include "oce/errors.hpp"
#include "oce/parallel.hpp"
#include "oce/rng.hpp"

namespace oce {

BanditInstance BanditInstance::make(std::vector<LossModel> arm_models, const DisutilitySpec& spec,
                                    std::uint64_t oracle_seed) {
    if (arm_models.size() < 2) throw DomainError("BanditInstance: needs K >= 2 arms");
    BanditInstance instance;
    instance.spec = spec;
    instance.true_oce.reserve(arm_models.size());
    for (std::size_t i = 0; i < arm_models.size(); ++i) {
        instance.true_oce.push_back(
            reference_risk(arm_models[i], spec, mix_seed(oracle_seed, i)).risk);
    }
    instance.arms = std::move(arm_models);
    return instance;
}

double sr_log_bar(int num_arms) {
    double acc = 0.5;
    for (int i = 2; i <= num_arms; ++i) acc += 1.0 / static_cast<double>(i);
    return acc;
}

std::vector<std::int64_t> sr_schedule(int num_arms, std::int64_t budget) {
    if (num_arms < 2) throw DomainError("sr_schedule: needs K >= 2");
    if (budget <= num_arms) throw BudgetError("sr_schedule: needs budget > K");
    const double log_bar = sr_log_bar(num_arms);
    const double free_budget = static_cast<double>(budget - num_arms);
    std::vector<std::int64_t> targets(static_cast<std::size_t>(num_arms - 1));
    for (int k = 1; k <= num_arms - 1; ++k) {
        targets[static_cast<std::size_t>(k - 1)] = static_cast<std::int64_t>(
            std::ceil(free_budget / (log_bar * static_cast<double>(num_arms + 1 - k))));
    }
    return targets;
}

SrResult run_oce_sr(const BanditInstance& instance, std::int64_t budget, std::uint64_t seed) {
    std::vector<std::uint64_t> arm_seeds(instance.arms.size());
    for (std::size_t i = 0; i < arm_seeds.size(); ++i) {
        arm_seeds[i] = mix_seed(seed, i);
    }
    return run_oce_sr(instance, budget, arm_seeds);
}

SrResult run_oce_sr(const BanditInstance& instance, std::int64_t budget,
                    std::span<const std::uint64_t> arm_seeds) {
    const int num_arms = static_cast<int>(instance.arms.size());
    if (arm_seeds.size() != instance.arms.size()) {
        throw DomainError("run_oce_sr: one stream seed per arm");
    }
    const std::vector<std::int64_t> targets = sr_schedule(num_arms, budget);

    std::vector<LossSampler> streams;
    streams.reserve(instance.arms.size());
    for (std::size_t i = 0; i < instance.arms.size(); ++i) {
        streams.emplace_back(instance.arms[i], arm_seeds[i]);
    }

    std::vector<std::vector<double>> history(instance.arms.size());
    std::vector<int> active(static_cast<std::size_t>(num_arms));
    std::iota(active.begin(), active.end(), 0);

    SrResult result;
    result.pulls.assign(instance.arms.size(), 0);

    std::int64_t cumulative = 0;
    for (int phase = 1; phase <= num_arms - 1; ++phase) {
        const std::int64_t target = targets[static_cast<std::size_t>(phase - 1)];
        const std::int64_t fresh = target - cumulative;
        cumulative = target;
        int worst = -1;
        double worst_risk = 0.0;
        for (int arm : active) {
            auto& buf = history[static_cast<std::size_t>(arm)];
            auto& stream = streams[static_cast<std::size_t>(arm)];
            for (std::int64_t i = 0; i < fresh; ++i) buf.push_back(stream.next());
            result.pulls[static_cast<std::size_t>(arm)] += fresh;
            result.total_pulls += fresh;
            const BatchEstimate est = estimate_oce(buf, instance.spec);
            if (worst == -1 || est.oce_hat > worst_risk) {
                worst = arm;
                worst_risk = est.oce_hat;
            }
        }
        result.eliminations.emplace_back(phase, worst);
        active.erase(std::remove(active.begin(), active.end(), worst), active.end());
    }
    result.chosen = active.front();
    return result;
}

MisidEstimate misid_rate(const BanditInstance& instance, std::int64_t budget, int reps,
                         std::uint64_t seed) {
    if (reps < 1) throw DomainError("misid_rate: reps must be >= 1");
    const int best = static_cast<int>(std::distance(
        instance.true_oce.begin(),
        std::min_element(instance.true_oce.begin(), instance.true_oce.end())));
    std::vector<char> wrong(static_cast<std::size_t>(reps), 0);
    parallel_for(reps, [&](std::int64_t r) {
        const SrResult run = run_oce_sr(instance, budget, seed + static_cast<std::uint64_t>(r));
        wrong[static_cast<std::size_t>(r)] = run.chosen != best ? 1 : 0;
    });
    int misses = 0;
    for (char w : wrong) misses += w;
    MisidEstimate out;
    out.reps = reps;
    out.rate = static_cast<double>(misses) / static_cast<double>(reps);
    out.std_error = std::sqrt(out.rate * (1.0 - out.rate) / static_cast<double>(reps));
    return out;
}

HardnessResult hardness(const BanditInstance& instance) {
    std::vector<double> sorted = instance.true_oce;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.size() < 2) throw DomainError("hardness: needs K >= 2");
    if (sorted[1] == sorted[0]) {
        throw NonUniqueOptimumError("hardness: best risk is tied");
    }
    HardnessResult out;
    out.gaps.resize(sorted.size());
    for (std::size_t i = 1; i < sorted.size(); ++i) out.gaps[i] = sorted[i] - sorted[0];
    out.gaps[0] = out.gaps[1]; // best arm's own gap is undefined
    out.h = 0.0;
    for (std::size_t i = 0; i < out.gaps.size(); ++i) {
        const double gap = out.gaps[i];
        const double denom = std::min(gap / 2.0, gap * gap / 4.0);
        out.h = std::max(out.h, static_cast<double>(i + 1) / denom);
    }
    return out;
}

BanditInstance load_instance(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open instance file: " + path.string());
    std::string line;
    std::string spec_text;
    std::vector<LossModel> arms;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError("instance file: expected key=value, got '" + line + "'");
        }
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "phi") {
            spec_text = value;
        } else if (key == "arm") {
            arms.push_back(load_model(path.parent_path() / value));
        } else {
            throw ParseError("instance file: unknown key '" + key + "'");
        }
    }
    if (spec_text.empty()) throw ParseError("instance file: missing phi=");
    return BanditInstance::make(std::move(arms), DisutilitySpec::parse(spec_text));
}

} // namespace oce
