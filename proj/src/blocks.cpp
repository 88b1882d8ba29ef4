#include "taseplab/blocks.hpp"

#include <cmath>
#include <string>

#include "taseplab/errors.hpp"
#include "taseplab/maxcurrent.hpp"
#include "taseplab/rng.hpp"

namespace taseplab {

namespace {

bool has_defect(const Environment& env, Interval block) {
    for (std::int64_t x = block.lo; x <= block.hi; ++x)
        if (env.rate(x) != 1.0) return true;
    return false;
}

// good only if the confidence interval clears the threshold; indecision
// doubles the horizon and, when the budget is spent, counts as bad (the
// conservative side for a one-sided use of goodness)
void current_verdict(const Environment& env, Interval block, double threshold,
                     const ClassifyStrategy& strategy, BlockStatus& status) {
    const auto N = static_cast<int>(block.length() - 1);
    if (strategy.kind == ClassifyStrategy::exact) {
        if (N > strategy.exact_cutoff)
            throw budget_error("classify_block: " + std::to_string(N) +
                               " particle sites exceed the exact cutoff; use the Monte Carlo strategy");
        const double j = stationary_current_exact(OpenSystem::from_box(env, block)).current;
        status.has_estimate = true;
        status.j_estimate = j;
        if (j < threshold) {
            status.verdict = BlockVerdict::bad;
            status.reason = BadReason::current_below_threshold;
        }
        return;
    }
    double horizon = strategy.budget_t;
    const OpenSystem sys = OpenSystem::from_box(env, block);
    for (int attempt = 0; attempt <= strategy.max_doublings; ++attempt) {
        const auto est = stationary_current_mc(
            sys, horizon, mix3(strategy.seed, static_cast<std::uint64_t>(block.lo), static_cast<std::uint64_t>(attempt)));
        status.has_estimate = true;
        status.j_estimate = est.value;
        status.half_width = est.half_width;
        if (est.value - est.half_width >= threshold) return; // clearly good
        if (est.value + est.half_width < threshold) {
            status.verdict = BlockVerdict::bad;
            status.reason = BadReason::current_below_threshold;
            return;
        }
        horizon *= 2.0;
    }
    status.resolved = false;
    status.verdict = BlockVerdict::bad;
    status.reason = BadReason::current_below_threshold;
}

} // namespace

BlockStatus classify_block(const Environment& env, Interval block, int level, const ScaleTable& scales,
                           const ClassifyStrategy& strategy) {
    if (level < 1) throw validation_error("classify_block: level must be >= 1");
    const ScaleRow& row = scales.at(level);
    if (!row.exact || block.length() != row.K)
        throw validation_error("classify_block: block length does not match the level-" +
                               std::to_string(level) + " scale");

    BlockStatus status;
    status.level = level;
    if (level == 1) {
        if (has_defect(env, block)) {
            status.verdict = BlockVerdict::bad;
            status.reason = BadReason::has_defect;
        }
        return status;
    }

    const ScaleRow& sub = scales.at(level - 1);
    const std::int64_t l = row.K / sub.K;
    int bad_subblocks = 0;
    for (std::int64_t i = 0; i < l; ++i) {
        const Interval piece{block.lo + i * sub.K, block.lo + (i + 1) * sub.K - 1};
        if (classify_block(env, piece, level - 1, scales, strategy).verdict == BlockVerdict::bad)
            ++bad_subblocks;
        if (bad_subblocks >= 2) {
            status.verdict = BlockVerdict::bad;
            status.reason = BadReason::too_many_bad_subblocks;
            return status;
        }
    }
    current_verdict(env, block, row.j, strategy, status);
    return status;
}

BadProbEstimate bad_block_probability(const RenormParams& params, const ScaleTable& scales, int level,
                                      int replicas, std::uint64_t seed, const ClassifyStrategy& strategy) {
    if (replicas < 100) throw validation_error("bad_block_probability: need at least 100 replicas");
    const ScaleRow& row = scales.at(level);
    if (!row.exact) throw validation_error("bad_block_probability: level scale too large to materialize");
    if (strategy.kind == ClassifyStrategy::exact && level >= 2 && row.K - 1 > strategy.exact_cutoff)
        throw budget_error("bad_block_probability: unresolvable at this level, the exact solver cutoff is " +
                           std::to_string(strategy.exact_cutoff) + " particle sites");

    DisorderSpec spec;
    spec.r = params.r;
    spec.R = params.r;
    spec.epsilon = params.epsilon;
    spec.q_kind = QKind::point_mass_at_r;

    long bad = 0;
    for (int rep = 0; rep < replicas; ++rep) {
        spec.seed = derive_seed(seed, "bad-block", static_cast<std::uint64_t>(rep));
        ClassifyStrategy local = strategy;
        local.seed = derive_seed(seed, "bad-block-mc", static_cast<std::uint64_t>(rep));
        const Environment env = sample_environment(spec, Interval{0, row.K - 1});
        if (classify_block(env, env.window, level, scales, local).verdict == BlockVerdict::bad) ++bad;
    }

    BadProbEstimate est;
    est.replicas = replicas;
    est.q_hat = static_cast<double>(bad) / replicas;
    est.stderr_ = std::sqrt(est.q_hat * (1.0 - est.q_hat) / replicas);
    est.bound_2zeta = 2.0 * row.zeta;
    const LemmaConstants& k = scales.constants;
    est.lemma_preconditions = params.gamma < k.gamma0 && params.epsilon <= k.eps0 &&
                              static_cast<double>(params.K1) >= k.K_star_low &&
                              static_cast<double>(params.K1) <= k.K_star_eps;
    return est;
}

const char* bad_reason_name(BadReason r) {
    switch (r) {
        case BadReason::none: return "none";
        case BadReason::has_defect: return "has_defect";
        case BadReason::too_many_bad_subblocks: return "too_many_bad_subblocks";
        case BadReason::current_below_threshold: return "current_below_threshold";
    }
    return "?";
}

} // namespace taseplab
