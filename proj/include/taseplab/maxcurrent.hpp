#ifndef TASEPLAB_MAXCURRENT_HPP
#define TASEPLAB_MAXCURRENT_HPP

#include <cstdint>
#include <vector>

#include "taseplab/disorder.hpp"

namespace taseplab {

// Open-boundary segment driven by the disorder on a box [x1,x2]:
// particles live on [x1+1,x2], enter at x1+1 with rate alpha(x1), hop from
// site x to x+1 with rate alpha(x), and leave from x2 with rate alpha(x2).
struct OpenSystem {
    double entry_rate = 1.0;
    std::vector<double> hop_rates; // one per internal bond, size N-1
    double exit_rate = 1.0;

    int particle_sites() const { return static_cast<int>(hop_rates.size()) + 1; }

    // All rates in order: entry, internal hops, exit (size N+1).
    std::vector<double> all_rates() const;

    static OpenSystem from_box(const Environment& env, Interval box);
    static OpenSystem homogeneous(int particle_sites, double rate);
    void validate() const;
};

struct ExactCurrent {
    double current = 0.0;                // average over bonds
    double residual = 0.0;               // stationarity defect of the solved distribution
    double bond_spread = 0.0;            // max - min over per-bond currents
    std::vector<double> bond_currents;   // entry, internal..., exit (size N+1)
};

constexpr int kDefaultDenseCutoff = 10; // direct LU up to 2^10 states
constexpr int kDefaultExactCutoff = 14; // power iteration beyond the dense range

// Stationary current of the 2^N-state generator. Throws budget_error above
// the cutoff.
ExactCurrent stationary_current_exact(const OpenSystem& sys,
                                      int dense_cutoff = kDefaultDenseCutoff,
                                      int exact_cutoff = kDefaultExactCutoff);

struct CurrentEstimate {
    double value = 0.0;
    double half_width = 0.0; // 99% two-sided, batch means
};

CurrentEstimate stationary_current_mc(const OpenSystem& sys, double t_max, std::uint64_t seed);

// Empirical check of the finite-box current decay condition
//   P( j_inf over [0,N] <= r/4 + a/N^{b/2} ) <= c/N^beta.
struct HProbeRow {
    int N = 0;
    double threshold = 0.0;
    double p_hat = 0.0;
    double ci_lo = 0.0; // Wilson 99%
    double ci_hi = 0.0;
    double bound = 0.0; // c/N^beta
    enum Verdict { satisfying, violating, indeterminate } verdict = indeterminate;
};

std::vector<HProbeRow> assumption_h_probe(const DisorderSpec& spec, double a, double b, double beta,
                                          double c, const std::vector<int>& sizes, int replicas,
                                          int exact_cutoff = kDefaultExactCutoff);

// Coupling bound j(alpha) >= j(min alpha, ..., min alpha) >= (min alpha)/4,
// both sides computed exactly.
struct MinRateBound {
    double current = 0.0;
    double homogeneous_floor = 0.0; // current of the all-min-rate system
    bool holds = false;
};

MinRateBound min_rate_current_bound(const Environment& env, Interval box);

const char* h_verdict_name(HProbeRow::Verdict v);

} // namespace taseplab

#endif
