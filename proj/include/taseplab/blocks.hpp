#ifndef TASEPLAB_BLOCKS_HPP
#define TASEPLAB_BLOCKS_HPP

#include <cstdint>

#include "taseplab/disorder.hpp"
#include "taseplab/renorm.hpp"

namespace taseplab {

// Recursive disorder classification: a level-1 block is good iff defect
// free; a level-(n+1) block is good iff at most one of its level-n subblocks
// is bad and its open-boundary stationary current clears the level-(n+1)
// threshold.

enum class BlockVerdict { good, bad };

enum class BadReason { none, has_defect, too_many_bad_subblocks, current_below_threshold };

struct BlockStatus {
    int level = 1;
    BlockVerdict verdict = BlockVerdict::good;
    BadReason reason = BadReason::none;
    bool has_estimate = false;
    double j_estimate = 0.0;
    double half_width = 0.0; // 0 for exact verdicts
    bool resolved = true;    // false when the confidence loop gave up (counted bad)
};

struct ClassifyStrategy {
    enum Kind { exact, monte_carlo } kind = exact;
    double budget_t = 2e4;  // Monte Carlo horizon, doubled on indecision
    int max_doublings = 3;
    int exact_cutoff = 14;  // particle sites
    std::uint64_t seed = 1;
};

BlockStatus classify_block(const Environment& env, Interval block, int level, const ScaleTable& scales,
                           const ClassifyStrategy& strategy);

struct BadProbEstimate {
    double q_hat = 0.0;
    double stderr_ = 0.0;
    double bound_2zeta = 0.0;     // analytic bound 2c/K_n^beta
    bool lemma_preconditions = false;
    int replicas = 0;
};

// Monte Carlo estimate of the probability that a level-n block is bad.
BadProbEstimate bad_block_probability(const RenormParams& params, const ScaleTable& scales, int level,
                                      int replicas, std::uint64_t seed, const ClassifyStrategy& strategy);

const char* bad_reason_name(BadReason r);

} // namespace taseplab

#endif
