#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "taseplab/errors.hpp"
#include "taseplab/maxcurrent.hpp"
#include "taseplab/rng.hpp"

using namespace taseplab;

namespace {
Environment random_env(std::int64_t len, double lo, std::uint64_t seed) {
    std::vector<double> rates;
    CounterStream rng(seed);
    for (std::int64_t i = 0; i < len; ++i) rates.push_back(lo + (1.0 - lo) * rng.next_unit_open());
    return make_environment({0, len - 1}, std::move(rates));
}
} // namespace

TEST_CASE("homogeneous rate-1 currents are ratios of consecutive Catalan numbers") {
    const double catalan[] = {1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862, 16796};
    for (int N = 1; N <= 9; ++N) {
        const auto ec = stationary_current_exact(OpenSystem::homogeneous(N, 1.0));
        CHECK(ec.current == doctest::Approx(catalan[N] / catalan[N + 1]).epsilon(1e-12));
        CHECK(ec.residual <= 1e-12);
        CHECK(ec.bond_spread <= 1e-10);
    }
}

TEST_CASE("time rescaling: rate-r system is r times the rate-1 system") {
    for (double r : {0.37, 0.8}) {
        const double base = stationary_current_exact(OpenSystem::homogeneous(4, 1.0)).current;
        const double scaled = stationary_current_exact(OpenSystem::homogeneous(4, r)).current;
        CHECK(scaled == doctest::Approx(r * base).epsilon(1e-12));
    }
}

TEST_CASE("power iteration agrees with the dense solve") {
    for (std::uint64_t seed : {1, 2, 3}) {
        const Environment env = random_env(8, 0.4, seed);
        const OpenSystem sys = OpenSystem::from_box(env, env.window);
        const auto dense = stationary_current_exact(sys, kDefaultDenseCutoff, kDefaultExactCutoff);
        const auto power = stationary_current_exact(sys, /*dense_cutoff=*/2, kDefaultExactCutoff);
        CHECK(std::fabs(dense.current - power.current) <= 1e-10);
        CHECK(power.residual <= 1e-12);
    }
}

TEST_CASE("exact cutoff is enforced") {
    CHECK_THROWS_AS(stationary_current_exact(OpenSystem::homogeneous(15, 1.0)), budget_error);
}

TEST_CASE("homogeneous currents decrease in N and keep a C/N margin above r/4") {
    double prev = 1.0, fitted = 1e9;
    for (int N = 1; N <= 10; ++N) {
        const double j = stationary_current_exact(OpenSystem::homogeneous(N, 0.6)).current;
        CHECK(j < prev);
        prev = j;
        fitted = std::min(fitted, N * (j - 0.6 / 4.0));
    }
    CHECK(fitted > 0.0);
}

TEST_CASE("raising one rate never lowers the exact current") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const Environment env = random_env(6, 0.3, mix2(17, seed));
        const OpenSystem sys = OpenSystem::from_box(env, env.window);
        const double base = stationary_current_exact(sys).current;
        CounterStream rng(mix2(18, seed));
        OpenSystem bumped = sys;
        const auto which = static_cast<std::size_t>(rng.next_index(bumped.hop_rates.size() + 2));
        auto bump = [&](double& r) { r = std::min(1.0, r + 0.1 + 0.3 * rng.next_unit_open()); };
        if (which == 0) bump(bumped.entry_rate);
        else if (which == bumped.hop_rates.size() + 1) bump(bumped.exit_rate);
        else bump(bumped.hop_rates[which - 1]);
        CHECK(stationary_current_exact(bumped).current >= base - 1e-12);
    }
}

TEST_CASE("Monte Carlo estimate brackets the exact current") {
    const auto hom = stationary_current_mc(OpenSystem::homogeneous(2, 1.0), 1e5, 41);
    CHECK(hom.half_width > 0.0);
    CHECK(std::fabs(hom.value - 0.4) <= 3.0 * hom.half_width);

    for (std::uint64_t seed : {7, 8}) {
        const Environment env = random_env(6, 0.4, mix2(91, seed));
        const OpenSystem sys = OpenSystem::from_box(env, env.window);
        const double exact = stationary_current_exact(sys).current;
        const auto est = stationary_current_mc(sys, 2e5, seed);
        CHECK(std::fabs(est.value - exact) <= 3.0 * est.half_width);
    }
}

TEST_CASE("coupling floor: current dominates the all-minimum-rate system") {
    const Environment hom = make_environment({0, 3}, {0.7, 0.7, 0.7, 0.7});
    const auto equal_case = min_rate_current_bound(hom, {0, 3});
    CHECK(equal_case.current == doctest::Approx(equal_case.homogeneous_floor).epsilon(1e-12));
    CHECK(equal_case.holds);

    const Environment mixed = make_environment({0, 2}, {1.0, 0.5, 1.0});
    const auto bound = min_rate_current_bound(mixed, {0, 2});
    CHECK(bound.current > bound.homogeneous_floor);
    CHECK(bound.homogeneous_floor >= 0.5 / 4.0);
    CHECK(bound.current >= 0.125);

    for (std::uint64_t seed = 0; seed < 100; ++seed)
        CHECK(min_rate_current_bound(random_env(5, 0.3, mix2(55, seed)), {0, 4}).holds);
}

TEST_CASE("current-decay probe: forced extremes") {
    DisorderSpec pure;
    pure.r = 0.5;
    pure.R = 0.5;
    pure.seed = 6;

    // no defects and a modest margin: the current always clears the threshold
    pure.epsilon = 0.0;
    auto rows = assumption_h_probe(pure, 0.3, 1.0, 1.0, 1.0, {2, 4, 6, 9}, 50);
    for (const auto& row : rows) CHECK(row.p_hat == 0.0);

    // all-defect boxes with a huge margin: the threshold always wins
    pure.epsilon = 1.0;
    rows = assumption_h_probe(pure, 2.0, 1.0, 1.0, 1.0, {2, 4, 6}, 50);
    for (const auto& row : rows) {
        CHECK(row.p_hat == 1.0);
        if (row.N > 2) CHECK(row.verdict == HProbeRow::violating);
    }

    CHECK_THROWS_AS(assumption_h_probe(pure, 1, 1, 1, 1, {4}, 0), validation_error);
}

TEST_CASE("minimum-rate tail bound behind the probe") {
    DisorderSpec spec;
    spec.r = 0.5;
    spec.R = 0.9;
    spec.epsilon = 1.0;
    spec.q_kind = QKind::power_tail;
    spec.kappa = 2.0;
    const int N = 16, reps = 4000;
    const double u = 0.02;
    std::int64_t hits = 0;
    for (int rep = 0; rep < reps; ++rep) {
        DisorderSpec local = spec;
        local.seed = derive_seed(404, "min-rate", static_cast<std::uint64_t>(rep));
        if (sample_environment(local, {0, N}).min_rate() <= spec.r + u) ++hits;
    }
    const double p_hat = static_cast<double>(hits) / reps;
    const double union_bound = (N + 1) * std::pow(u / (spec.R - spec.r), spec.kappa);
    CHECK(p_hat <= union_bound + 3.0 * std::sqrt(union_bound / reps));
}
