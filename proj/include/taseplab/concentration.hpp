#ifndef TASEPLAB_CONCENTRATION_HPP
#define TASEPLAB_CONCENTRATION_HPP

#include <cstdint>
#include <vector>

namespace taseplab {

// Tail toolkit for the fluctuation bounds: subgaussian normalization, the
// expected-max-of-sums inequality, harmonic means of exponential maxima, and
// the empirical harnesses that exercise them on passage times.

struct SubgaussianSpec {
    double C_tail = 1.0; // >= 1
    double V = 1.0;      // > 0
};

struct Normalization {
    double shift = 0.0; // sqrt(V log C)
    double scale = 1.0; // sqrt(V)
};

// P(Y >= t) <= C e^{-t^2/V} turns into P((Y-shift)/scale >= t) <= e^{-t^2}.
Normalization subgaussian_shift(const SubgaussianSpec& spec);

// Smallest A with log(1 + sqrt(pi) th e^{th^2/4}) - sqrt(pi) th <= A th^2/4
// for all th > 0. The ratio increases to its limit 1 at infinity, so the
// supremum is 1; the grid search documents that no interior point beats it.
struct ConstantA {
    double value = 1.0;
    double best_interior_ratio = 0.0;
    double best_interior_theta = 0.0;
};

ConstantA constant_A(int grid_points = 20000, double theta_hi = 200.0);

// E max_a sum_i Y_{a,i} <= max_a sum_i E Y_{a,i}
//   + sqrt(max_a sum_i V_{a,i}) (sqrt(pi |I|) + sqrt(pi A) + sqrt(A log|A|)).
double max_sum_bound(const std::vector<std::vector<double>>& means,
                     const std::vector<std::vector<double>>& vars, double A_const);

// Expected maximum of `count` i.i.d. unit exponentials: the harmonic number.
double exp_max_mean(std::int64_t count);
// Smallest C with exp_max_mean(1+floor(t)) <= C (1 + log(1+t)) over a grid.
double exp_max_envelope_constant(const std::vector<double>& t_grid);

struct TailReportRow {
    double t = 0.0;
    double empirical = 0.0;
    double bound = 0.0; // e^{-t^2}
    bool pass = false;  // empirical <= bound + 3 sigma sampling band
};

// Passage-time concentration probe: homogeneous grid with services cut off
// at M, normalized by 8 M sqrt(path length); tails compared to e^{-t^2}.
std::vector<TailReportRow> passage_tail_check(std::int64_t corner_x, std::int64_t corner_y, double M,
                                              int replicas, const std::vector<double>& t_grid,
                                              std::uint64_t seed);

// Fluctuation split on an enumerable two-scale instance: the gap between
// E[max over skeletons] and max over skeletons of E, normalized by the block
// length. Nonnegative by construction on any common replica pool.
struct FluctuationSplit {
    double gap = 0.0;          // F value (per unit block length)
    double envelope_unit = 0.0; // bound shape with unit constant
    double fitted_constant = 0.0;
    std::size_t skeletons = 0;
    int replicas = 0;
};

FluctuationSplit fluctuation_split(std::int64_t block_len_next, std::int64_t block_len, int sigma,
                                   std::int64_t y_prime, int replicas, std::uint64_t seed);

} // namespace taseplab

#endif
