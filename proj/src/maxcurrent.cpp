#include "taseplab/maxcurrent.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "taseplab/errors.hpp"
#include "taseplab/rng.hpp"
#include "taseplab/tasep.hpp"

namespace taseplab {

std::vector<double> OpenSystem::all_rates() const {
    std::vector<double> rates;
    rates.reserve(hop_rates.size() + 2);
    rates.push_back(entry_rate);
    rates.insert(rates.end(), hop_rates.begin(), hop_rates.end());
    rates.push_back(exit_rate);
    return rates;
}

OpenSystem OpenSystem::from_box(const Environment& env, Interval box) {
    if (box.length() < 2) throw validation_error("OpenSystem: box must contain at least one particle site");
    if (!env.window.contains(box.lo) || !env.window.contains(box.hi))
        throw validation_error("OpenSystem: box not contained in the environment window");
    OpenSystem sys;
    sys.entry_rate = env.rate(box.lo);
    for (std::int64_t x = box.lo + 1; x < box.hi; ++x) sys.hop_rates.push_back(env.rate(x));
    sys.exit_rate = env.rate(box.hi);
    sys.validate();
    return sys;
}

OpenSystem OpenSystem::homogeneous(int particle_sites, double rate) {
    OpenSystem sys;
    sys.entry_rate = rate;
    sys.hop_rates.assign(static_cast<std::size_t>(particle_sites - 1), rate);
    sys.exit_rate = rate;
    return sys;
}

void OpenSystem::validate() const {
    for (double a : all_rates())
        if (!(a > 0.0 && a <= 1.0)) throw validation_error("OpenSystem: rates must lie in (0,1]");
}

namespace {

// bit k of a state = occupation of particle site k+1
struct Transitions {
    int N;
    std::vector<double> rates; // entry, hops, exit

    template <typename F>
    void for_each(std::uint32_t s, F&& f) const {
        if (!(s & 1u)) f(s | 1u, rates[0], 0);
        for (int k = 1; k < N; ++k) {
            const std::uint32_t from = 1u << (k - 1), to = 1u << k;
            if ((s & from) && !(s & to)) f(s ^ from ^ to, rates[static_cast<std::size_t>(k)], k);
        }
        const std::uint32_t last = 1u << (N - 1);
        if (s & last) f(s ^ last, rates[static_cast<std::size_t>(N)], N);
    }
};

ExactCurrent finish(const Transitions& tr, const std::vector<double>& pi) {
    const std::size_t states = pi.size();
    ExactCurrent out;
    out.bond_currents.assign(static_cast<std::size_t>(tr.N) + 1, 0.0);
    double residual = 0.0;
    std::vector<double> inflow(states, 0.0);
    for (std::uint32_t s = 0; s < states; ++s) {
        double outflow = 0.0;
        tr.for_each(s, [&](std::uint32_t s2, double rate, int bond) {
            const double flow = pi[s] * rate;
            out.bond_currents[static_cast<std::size_t>(bond)] += flow;
            inflow[s2] += flow;
            outflow += flow;
        });
        inflow[s] -= outflow;
    }
    for (std::uint32_t s = 0; s < states; ++s) residual = std::max(residual, std::fabs(inflow[s]));
    out.residual = residual;
    const auto [mn, mx] = std::minmax_element(out.bond_currents.begin(), out.bond_currents.end());
    out.bond_spread = *mx - *mn;
    double sum = 0.0;
    for (double j : out.bond_currents) sum += j;
    out.current = sum / static_cast<double>(out.bond_currents.size());
    return out;
}

std::vector<double> solve_dense(const Transitions& tr) {
    const std::size_t n = std::size_t{1} << tr.N;
    // A = Q^T with the last balance equation replaced by normalization
    std::vector<double> A(n * n, 0.0), rhs(n, 0.0);
    for (std::uint32_t s = 0; s < n; ++s) {
        double outflow = 0.0;
        tr.for_each(s, [&](std::uint32_t s2, double rate, int) {
            A[static_cast<std::size_t>(s2) * n + s] += rate;
            outflow += rate;
        });
        A[static_cast<std::size_t>(s) * n + s] -= outflow;
    }
    for (std::uint32_t s = 0; s < n; ++s) A[(n - 1) * n + s] = 1.0;
    rhs[n - 1] = 1.0;

    // Gaussian elimination with partial pivoting
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        double best = std::fabs(A[perm[col] * n + col]);
        for (std::size_t row = col + 1; row < n; ++row) {
            const double v = std::fabs(A[perm[row] * n + col]);
            if (v > best) { best = v; piv = row; }
        }
        std::swap(perm[col], perm[piv]);
        const double* prow = &A[perm[col] * n];
        const double pinv = 1.0 / prow[col];
        for (std::size_t row = col + 1; row < n; ++row) {
            double* r = &A[perm[row] * n];
            const double f = r[col] * pinv;
            if (f == 0.0) continue;
            r[col] = 0.0;
            for (std::size_t k = col + 1; k < n; ++k) r[k] -= f * prow[k];
            rhs[perm[row]] -= f * rhs[perm[col]];
        }
    }
    std::vector<double> pi(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        const double* r = &A[perm[i] * n];
        double acc = rhs[perm[i]];
        for (std::size_t k = i + 1; k < n; ++k) acc -= r[k] * pi[k];
        pi[i] = acc / r[i];
    }
    return pi;
}

std::vector<double> solve_power(const Transitions& tr) {
    const std::size_t n = std::size_t{1} << tr.N;
    double lambda = 0.0;
    for (double r : tr.rates) lambda += r;
    lambda += 1.0; // strict uniformization bound keeps the chain aperiodic

    std::vector<double> pi(n, 1.0 / static_cast<double>(n)), next(n, 0.0);
    const int max_rounds = 4000, steps_per_round = 64;
    for (int round = 0; round < max_rounds; ++round) {
        double delta = 0.0;
        for (int it = 0; it < steps_per_round; ++it) {
            std::copy(pi.begin(), pi.end(), next.begin());
            for (std::uint32_t s = 0; s < n; ++s) {
                const double mass = pi[s];
                if (mass == 0.0) continue;
                tr.for_each(s, [&](std::uint32_t s2, double rate, int) {
                    const double move = mass * rate / lambda;
                    next[s2] += move;
                    next[s] -= move;
                });
            }
            if (it + 1 == steps_per_round)
                for (std::uint32_t s = 0; s < n; ++s) delta = std::max(delta, std::fabs(next[s] - pi[s]));
            pi.swap(next);
        }
        if (lambda * delta < 1e-14) break;
    }
    double total = 0.0;
    for (double p : pi) total += p;
    for (double& p : pi) p /= total;
    return pi;
}

} // namespace

ExactCurrent stationary_current_exact(const OpenSystem& sys, int dense_cutoff, int exact_cutoff) {
    sys.validate();
    const int N = sys.particle_sites();
    if (N > exact_cutoff)
        throw budget_error("stationary_current_exact: " + std::to_string(N) +
                           " particle sites exceed the exact cutoff " + std::to_string(exact_cutoff));
    Transitions tr{N, sys.all_rates()};
    const std::vector<double> pi = N <= dense_cutoff ? solve_dense(tr) : solve_power(tr);
    return finish(tr, pi);
}

CurrentEstimate stationary_current_mc(const OpenSystem& sys, double t_max, std::uint64_t seed) {
    sys.validate();
    if (!(t_max > 0.0)) throw validation_error("stationary_current_mc: t_max must be positive");
    const OpenRunRecord run = simulate_open_rates(sys.all_rates(), t_max, seed, 0.5, 20);
    CurrentEstimate est;
    est.value = run.mean_current;
    est.half_width = run.half_width_99;
    return est;
}

std::vector<HProbeRow> assumption_h_probe(const DisorderSpec& spec, double a, double b, double beta,
                                          double c, const std::vector<int>& sizes, int replicas,
                                          int exact_cutoff) {
    spec.validate();
    if (replicas < 1) throw validation_error("assumption_h_probe: replicas must be positive");
    std::vector<HProbeRow> rows;
    for (int N : sizes) {
        if (N < 1) throw validation_error("assumption_h_probe: box size must be >= 1");
        HProbeRow row;
        row.N = N;
        row.threshold = spec.r / 4.0 + a / std::pow(static_cast<double>(N), b / 2.0);
        row.bound = c / std::pow(static_cast<double>(N), beta);
        long hits = 0;
        for (int rep = 0; rep < replicas; ++rep) {
            DisorderSpec local = spec;
            local.seed = derive_seed(spec.seed, "h-probe", (static_cast<std::uint64_t>(N) << 32) + static_cast<std::uint64_t>(rep));
            const Environment env = sample_environment(local, Interval{0, N});
            const OpenSystem sys = OpenSystem::from_box(env, Interval{0, N});
            double j;
            if (N <= exact_cutoff) {
                j = stationary_current_exact(sys, kDefaultDenseCutoff, exact_cutoff).current;
            } else {
                j = stationary_current_mc(sys, 2e5, derive_seed(spec.seed, "h-probe-mc", static_cast<std::uint64_t>(rep))).value;
            }
            if (j <= row.threshold) ++hits;
        }
        // Wilson interval, 99% two-sided
        const double z = 2.575829303548901;
        const double nn = static_cast<double>(replicas), p = static_cast<double>(hits) / nn;
        const double z2 = z * z;
        const double centre = (p + z2 / (2 * nn)) / (1 + z2 / nn);
        const double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / (1 + z2 / nn);
        row.p_hat = p;
        row.ci_lo = std::max(0.0, centre - half);
        row.ci_hi = std::min(1.0, centre + half);
        if (row.ci_hi <= row.bound) row.verdict = HProbeRow::satisfying;
        else if (row.ci_lo > row.bound) row.verdict = HProbeRow::violating;
        else row.verdict = HProbeRow::indeterminate;
        rows.push_back(row);
    }
    return rows;
}

MinRateBound min_rate_current_bound(const Environment& env, Interval box) {
    const OpenSystem sys = OpenSystem::from_box(env, box);
    MinRateBound out;
    out.current = stationary_current_exact(sys).current;
    double floor_rate = sys.entry_rate;
    for (double r : sys.hop_rates) floor_rate = std::min(floor_rate, r);
    floor_rate = std::min(floor_rate, sys.exit_rate);
    out.homogeneous_floor = stationary_current_exact(OpenSystem::homogeneous(sys.particle_sites(), floor_rate)).current;
    out.holds = out.current >= out.homogeneous_floor - 1e-12 && out.homogeneous_floor >= floor_rate / 4.0 - 1e-12;
    return out;
}

const char* h_verdict_name(HProbeRow::Verdict v) {
    switch (v) {
        case HProbeRow::satisfying: return "satisfying";
        case HProbeRow::violating: return "violating";
        case HProbeRow::indeterminate: return "indeterminate";
    }
    return "?";
}

} // namespace taseplab
