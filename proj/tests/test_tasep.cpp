#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "taseplab/errors.hpp"
#include "taseplab/rng.hpp"
#include "taseplab/tasep.hpp"
#include "test_helpers.hpp"

using namespace taseplab;

namespace {
Environment unit_ring(std::int64_t L) {
    return make_environment({0, L - 1}, std::vector<double>(static_cast<std::size_t>(L), 1.0));
}

// exact stationary ring current at n particles on L sites (uniform measure)
double ring_flux_exact(std::int64_t n, std::int64_t L) {
    return static_cast<double>(n) * static_cast<double>(L - n) /
           (static_cast<double>(L) * static_cast<double>(L - 1));
}
} // namespace

TEST_CASE("initial profile: even placement") {
    const auto half = initial_profile(0.5, 4);
    CHECK(half.occupancy == std::vector<std::uint8_t>{1, 0, 1, 0});

    CHECK(initial_profile(0.0, 7).particle_count() == 0);

    const auto third = initial_profile(1.0 / 3.0, 9);
    CHECK(third.particle_count() == 3);
    CHECK(third.occupancy == std::vector<std::uint8_t>{1, 0, 0, 1, 0, 0, 1, 0, 0});

    for (std::int64_t L : {10, 97, 1000})
        for (double rho : {0.05, 0.37, 0.62, 0.99}) {
            const auto cfg = initial_profile(rho, L);
            CHECK(std::fabs(static_cast<double>(cfg.particle_count()) / L - rho) < 1.0 / L);
        }

    CHECK_THROWS_AS(initial_profile(-0.1, 8), validation_error);
    CHECK_THROWS_AS(initial_profile(0.5, 0), validation_error);
}

TEST_CASE("empty and jammed rings never move") {
    const Environment env = unit_ring(32);
    const auto empty = simulate_ring(env, 0.0, 100.0, 1);
    CHECK(empty.flux == 0.0);
    const auto jammed = simulate_ring(env, 1.0, 100.0, 1);
    CHECK(jammed.flux == 0.0);
    CHECK_THROWS_AS(simulate_ring(env, 0.5, -1.0, 1), validation_error);
    CHECK_THROWS_AS(simulate_ring(env, 1.5, 1.0, 1), validation_error);
}

TEST_CASE("small homogeneous ring matches the exact stationary current") {
    const auto rec = simulate_ring(unit_ring(4), 0.5, 4e4, 12345);
    CHECK(std::fabs(rec.flux - ring_flux_exact(2, 4)) <= 0.01);
}

TEST_CASE("conservation and bond-count spread on a disordered ring") {
    DisorderSpec spec;
    spec.r = 0.3;
    spec.R = 0.9;
    spec.epsilon = 0.4;
    spec.q_kind = QKind::uniform_on_r_R;
    spec.seed = 8;
    const Environment env = sample_environment(spec, {0, 127});
    const auto rec = simulate_ring(env, 0.3, 500.0, 9);
    CHECK(rec.particles_final == rec.particles);
    CHECK(rec.max_bond_count_spread <= rec.particles);
}

TEST_CASE("shared marks: raising every rate never lowers any bond count") {
    const std::vector<double> checkpoints{2.0, 5.0, 12.0};
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        CounterStream rng(mix2(500, seed));
        std::vector<double> low, high;
        for (int x = 0; x < 16; ++x) {
            const double a = 0.3 + 0.6 * rng.next_unit_open();
            low.push_back(a);
            high.push_back(std::min(1.0, a + 0.25 * rng.next_unit_open()));
        }
        const auto init = initial_profile(0.5, 16);
        const auto slow = simulate_ring_marks(make_environment({0, 15}, low), init, checkpoints, mix2(7, seed));
        const auto fast = simulate_ring_marks(make_environment({0, 15}, high), init, checkpoints, mix2(7, seed));
        for (std::size_t cp = 0; cp < checkpoints.size(); ++cp)
            for (std::size_t b = 0; b < 16; ++b) CHECK(fast[cp][b] >= slow[cp][b]);
    }
}

TEST_CASE("mark reference and thinning kernel agree in distribution") {
    DisorderSpec spec;
    spec.r = 0.5;
    spec.R = 0.5;
    spec.epsilon = 0.5;
    spec.seed = 77;
    const Environment env = sample_environment(spec, {0, 7});
    const auto init = initial_profile(0.5, 8);
    const double horizon = 400.0;

    std::vector<double> thinning, marks;
    for (std::uint64_t rep = 0; rep < 60; ++rep) {
        thinning.push_back(simulate_ring(env, init, horizon, mix2(1000, rep), 0.0).flux);
        const auto counts = simulate_ring_marks(env, init, {horizon}, mix2(2000, rep));
        double total = 0.0;
        for (auto c : counts[0]) total += static_cast<double>(c);
        marks.push_back(total / 8.0 / horizon);
    }
    const double gap = std::fabs(test::mean(thinning) - test::mean(marks));
    const double pooled = std::hypot(test::stderr_of_mean(thinning), test::stderr_of_mean(marks));
    CHECK(gap <= 3.0 * pooled);
}

TEST_CASE("open segment: tiny systems against hand-solved chains") {
    // one particle site, all rates 1: occupied half the time
    const auto one = simulate_open_rates({1.0, 1.0}, 2e5, 3);
    CHECK(std::fabs(one.mean_current - 0.5) <= 0.01);

    // two particle sites: 2/5 from the four-state stationary solve
    const auto two = simulate_open_rates({1.0, 1.0, 1.0}, 2e5, 4);
    CHECK(std::fabs(two.mean_current - 0.4) <= 0.01);
    CHECK(std::fabs(two.mean_current - 0.4) <= 3.0 * two.half_width_99);

    // blocked exit: the segment fills and the current dies
    const auto blocked = simulate_open_rates({1.0, 1.0, 0.0}, 2e4, 5);
    CHECK(blocked.mean_current <= 0.01);

    // stationarity diagnostic: per-bond time averages equalize
    const auto diag = simulate_open_rates({1.0, 1.0, 1.0, 1.0}, 2e5, 6);
    CHECK(diag.bond_spread <= 0.01);

    CHECK_THROWS_AS(simulate_open_rates({1.0}, 10.0, 1), validation_error);
    const Environment env = unit_ring(2);
    CHECK_THROWS_AS(simulate_open(env, {0, 0}, 10.0, 1), validation_error);
}

TEST_CASE("flux curve: homogeneous and uniformly slowed rings") {
    DisorderSpec clean;
    clean.r = 0.5;
    clean.R = 0.5;
    clean.epsilon = 0.0;
    const std::vector<double> densities{0.25, 0.5, 0.75};
    const std::int64_t L = 256;

    const auto curve = flux_curve(clean, densities, L, 6000.0, 3, 21);
    for (const auto& s : curve.samples) {
        const auto n = static_cast<std::int64_t>(std::floor(s.rho * L + 0.5));
        CHECK(std::fabs(s.flux - ring_flux_exact(n, L)) <= 0.01);
        CHECK(s.stderr_ > 0.0);
    }
    CHECK(curve.symmetry_defect <= 2.0 * curve.symmetry_pooled_se);

    DisorderSpec slowed = clean;
    slowed.epsilon = 1.0; // every site at rate r: time rescaling of the clean ring
    const auto slow_curve = flux_curve(slowed, densities, L, 6000.0, 3, 22);
    for (const auto& s : slow_curve.samples) {
        const auto n = static_cast<std::int64_t>(std::floor(s.rho * L + 0.5));
        CHECK(std::fabs(s.flux - 0.5 * ring_flux_exact(n, L)) <= 0.01);
    }

    CHECK_THROWS_AS(flux_curve(clean, densities, L, 100.0, 0, 1), validation_error);
    CHECK_THROWS_AS(flux_curve(clean, {1.2}, L, 100.0, 1, 1), validation_error);
}

TEST_CASE("flux curve replicas are thread-count independent by construction") {
    DisorderSpec spec;
    spec.r = 0.4;
    spec.R = 0.4;
    spec.epsilon = 0.2;
    const auto a = flux_curve(spec, {0.5}, 64, 500.0, 4, 99);
    const auto b = flux_curve(spec, {0.5}, 64, 500.0, 4, 99);
    CHECK(a.samples[0].flux == b.samples[0].flux);
    CHECK(a.samples[0].stderr_ == b.samples[0].stderr_);
}
