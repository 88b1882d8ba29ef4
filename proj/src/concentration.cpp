#include "taseplab/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "taseplab/errors.hpp"
#include "taseplab/lpp.hpp"
#include "taseplab/parallel.hpp"
#include "taseplab/rng.hpp"

namespace taseplab {

Normalization subgaussian_shift(const SubgaussianSpec& spec) {
    if (!(spec.C_tail >= 1.0)) throw validation_error("subgaussian_shift: C_tail must be >= 1");
    if (!(spec.V > 0.0)) throw validation_error("subgaussian_shift: V must be positive");
    return Normalization{std::sqrt(spec.V * std::log(spec.C_tail)), std::sqrt(spec.V)};
}

namespace {
constexpr double kSqrtPi = 1.7724538509055160273;

// log(1 + sqrt(pi) th e^{th^2/4}) - sqrt(pi) th, stable for large th
double lambda_fn(double th) {
    return std::log(std::exp(-th * th / 4.0) + kSqrtPi * th) + th * th / 4.0 - kSqrtPi * th;
}
} // namespace

ConstantA constant_A(int grid_points, double theta_hi) {
    if (grid_points < 10 || !(theta_hi > 1.0)) throw validation_error("constant_A: bad grid");
    ConstantA out;
    double best = -std::numeric_limits<double>::infinity(), best_th = 0.0;
    double lo = theta_hi / grid_points, hi = theta_hi;
    for (int refine = 0; refine < 3; ++refine) {
        const double step = (hi - lo) / grid_points;
        for (int i = 0; i <= grid_points; ++i) {
            const double th = lo + step * i;
            const double ratio = 4.0 * lambda_fn(th) / (th * th);
            if (ratio > best) {
                best = ratio;
                best_th = th;
            }
        }
        lo = std::max(lo / 10.0, best_th - 2.0 * (hi - lo) / grid_points);
        hi = best_th + 2.0 * (hi - lo) / grid_points;
    }
    out.best_interior_ratio = best;
    out.best_interior_theta = best_th;
    out.value = std::max(1.0, best); // the ratio climbs to 1 at infinity
    return out;
}

double max_sum_bound(const std::vector<std::vector<double>>& means,
                     const std::vector<std::vector<double>>& vars, double A_const) {
    if (means.empty() || means.size() != vars.size()) throw validation_error("max_sum_bound: empty family");
    const std::size_t I = means.front().size();
    if (I == 0) throw validation_error("max_sum_bound: empty index set");
    double max_mean = -std::numeric_limits<double>::infinity(), max_var = 0.0;
    for (std::size_t a = 0; a < means.size(); ++a) {
        if (means[a].size() != I || vars[a].size() != I)
            throw validation_error("max_sum_bound: ragged tables");
        double ms = 0.0, vs = 0.0;
        for (std::size_t i = 0; i < I; ++i) {
            if (!(vars[a][i] > 0.0)) throw validation_error("max_sum_bound: variances must be positive");
            ms += means[a][i];
            vs += vars[a][i];
        }
        max_mean = std::max(max_mean, ms);
        max_var = std::max(max_var, vs);
    }
    const double card_A = static_cast<double>(means.size());
    return max_mean + std::sqrt(max_var) * (kSqrtPi * std::sqrt(static_cast<double>(I)) +
                                            kSqrtPi * std::sqrt(A_const) +
                                            std::sqrt(A_const) * std::sqrt(std::log(card_A)));
}

double exp_max_mean(std::int64_t count) {
    if (count < 1) throw validation_error("exp_max_mean: count must be >= 1");
    if (count > 100'000'000) {
        const double n = static_cast<double>(count);
        const double euler = 0.57721566490153286061;
        return std::log(n) + euler + 1.0 / (2.0 * n) - 1.0 / (12.0 * n * n);
    }
    double h = 0.0;
    for (std::int64_t k = count; k >= 1; --k) h += 1.0 / static_cast<double>(k);
    return h;
}

double exp_max_envelope_constant(const std::vector<double>& t_grid) {
    double c = 0.0;
    for (double t : t_grid) {
        if (t < 0.0) throw validation_error("exp_max_envelope_constant: t must be nonnegative");
        const auto count = static_cast<std::int64_t>(1 + std::floor(t));
        c = std::max(c, exp_max_mean(count) / (1.0 + std::log1p(t)));
    }
    return c;
}

std::vector<TailReportRow> passage_tail_check(std::int64_t corner_x, std::int64_t corner_y, double M,
                                              int replicas, const std::vector<double>& t_grid,
                                              std::uint64_t seed) {
    if (replicas < 2) throw validation_error("passage_tail_check: need replicas");
    if (!(M > 0.0)) throw validation_error("passage_tail_check: M must be positive");
    const double cdf_at_cut = 1.0 - std::exp(-M);

    std::vector<double> T(static_cast<std::size_t>(replicas));
    parallel_for(replicas, [&](std::int64_t rep) {
        const std::uint64_t s = derive_seed(seed, "tail-check", static_cast<std::uint64_t>(rep));
        auto truncated = [&](std::int64_t i, std::int64_t j) {
            const double u = bits_to_unit_open(mix3(s, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)));
            return -std::log1p(-u * cdf_at_cut);
        };
        T[static_cast<std::size_t>(rep)] = passage_time([](std::int64_t) { return 1.0; }, truncated,
                                                        Point{0, 0}, Point{corner_x, corner_y});
    });

    double mean = 0.0;
    for (double v : T) mean += v;
    mean /= replicas;
    const double L = static_cast<double>(corner_x) + 2.0 * static_cast<double>(corner_y);
    const double norm = 8.0 * M * std::sqrt(L);

    std::vector<TailReportRow> rows;
    for (double t : t_grid) {
        TailReportRow row;
        row.t = t;
        long hits = 0;
        for (double v : T)
            if (std::fabs(v - mean) / norm >= t) ++hits;
        row.empirical = static_cast<double>(hits) / replicas;
        row.bound = std::exp(-t * t);
        const double band = 3.0 * std::sqrt(row.bound * (1.0 - row.bound) / replicas);
        row.pass = row.empirical <= row.bound + band;
        rows.push_back(row);
    }
    return rows;
}

FluctuationSplit fluctuation_split(std::int64_t block_len_next, std::int64_t block_len, int sigma,
                                   std::int64_t y_prime, int replicas, std::uint64_t seed) {
    if (replicas < 2) throw validation_error("fluctuation_split: need replicas");
    const auto skeletons =
        enumerate_skeletons(block_len_next / block_len, block_len, y_prime, sigma);
    if (skeletons.empty()) throw validation_error("fluctuation_split: no admissible skeleton");

    const auto S = skeletons.size();
    std::vector<double> sum_per_skeleton(S, 0.0);
    std::vector<double> max_per_replica(static_cast<std::size_t>(replicas), 0.0);
    std::vector<double> values(static_cast<std::size_t>(replicas) * S, 0.0);
    auto unit_rate = [](std::int64_t) { return 1.0; };
    parallel_for(replicas, [&](std::int64_t rep) {
        const ServiceField field{derive_seed(seed, "fluct-split", static_cast<std::uint64_t>(rep))};
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < S; ++s) {
            const double v = skeleton_passage_value(unit_rate, field, block_len_next, block_len, skeletons[s]);
            values[static_cast<std::size_t>(rep) * S + s] = v;
            best = std::max(best, v);
        }
        max_per_replica[static_cast<std::size_t>(rep)] = best;
    });
    for (int rep = 0; rep < replicas; ++rep)
        for (std::size_t s = 0; s < S; ++s) sum_per_skeleton[s] += values[static_cast<std::size_t>(rep) * S + s];

    double mean_of_max = 0.0;
    for (double v : max_per_replica) mean_of_max += v;
    mean_of_max /= replicas;
    double max_of_means = -std::numeric_limits<double>::infinity();
    for (double s : sum_per_skeleton) max_of_means = std::max(max_of_means, s / replicas);

    FluctuationSplit out;
    out.skeletons = S;
    out.replicas = replicas;
    const double Knext = static_cast<double>(block_len_next);
    out.gap = (mean_of_max - max_of_means) / Knext;
    const double y = static_cast<double>(y_prime) / Knext;
    out.envelope_unit = std::pow(std::log(Knext), 1.5) / std::sqrt(static_cast<double>(block_len)) *
                        std::sqrt(0.5 * sigma + y) * std::pow(1.0 + std::log1p(y), 1.5);
    out.fitted_constant = out.envelope_unit > 0.0 ? out.gap / out.envelope_unit : 0.0;
    return out;
}

} // namespace taseplab
