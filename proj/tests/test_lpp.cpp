#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "taseplab/errors.hpp"
#include "taseplab/lpp.hpp"
#include "taseplab/rng.hpp"
#include "test_helpers.hpp"

using namespace taseplab;

namespace {
const auto unit_rate = [](std::int64_t) { return 1.0; };
}

TEST_CASE("degenerate paths: one cell, one row") {
    const ServiceField f{11};
    auto alpha = [](std::int64_t x) { return x == 0 ? 0.5 : 1.0; };
    CHECK(passage_time(alpha, f, {0, 3}, {0, 3}) == doctest::Approx(f(0, 3) / 0.5).epsilon(1e-15));
    CHECK(passage_time(alpha, f, {0, 0}, {1, 0}) ==
          doctest::Approx(f(0, 0) / 0.5 + f(1, 0)).epsilon(1e-15));
    CHECK_THROWS_WITH_AS(passage_time(unit_rate, f, {0, 1}, {5, 0}), doctest::Contains("empty path set"),
                         validation_error);
}

TEST_CASE("dynamic program equals exhaustive enumeration") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const ServiceField f{mix2(3, seed)};
        auto alpha = [seed](std::int64_t x) {
            return 0.4 + 0.6 * bits_to_unit_open(mix3(900 + seed, 0, static_cast<std::uint64_t>(x)));
        };
        const double dp = passage_time(alpha, f, {0, 0}, {3, 3});
        const double brute = test::enumerate_passage(alpha, f, {0, 0}, {3, 3});
        CHECK(std::fabs(dp - brute) <= 1e-9);

        const Interval box{0, 4};
        const double dp_boxed = restricted_passage_time(alpha, f, box, {0, 0}, {2, 4});
        const double brute_boxed = test::enumerate_passage(alpha, f, {0, 0}, {2, 4}, box);
        CHECK(std::fabs(dp_boxed - brute_boxed) <= 1e-9);
    }
}

TEST_CASE("restriction: inactive when the box is wide, exact column sums when it is one column") {
    const ServiceField f{29};
    // the widest box any path can leave: constraint inactive
    const double free_time = passage_time(unit_rate, f, {0, 0}, {4, 6});
    CHECK(restricted_passage_time(unit_rate, f, {-6, 10}, {0, 0}, {4, 6}) ==
          doctest::Approx(free_time).epsilon(1e-15));

    auto alpha = [](std::int64_t) { return 0.8; };
    double column_sum = 0.0;
    for (int j = 0; j <= 9; ++j) column_sum += f(2, j) / 0.8;
    CHECK(restricted_passage_time(alpha, f, {2, 2}, {2, 0}, {2, 9}) ==
          doctest::Approx(column_sum).epsilon(1e-12));

    CHECK_THROWS_AS(restricted_passage_time(unit_rate, f, {0, 3}, {0, 0}, {5, 5}), validation_error);
}

TEST_CASE("restricted times never exceed unrestricted ones") {
    const ServiceField f{31};
    for (std::int64_t width : {1, 2, 4}) {
        const Interval box{0, width};
        const double boxed = restricted_passage_time(unit_rate, f, box, {0, 0}, {width, 5});
        const double free_time = passage_time(unit_rate, f, {0, 0}, {width, 5});
        CHECK(boxed <= free_time + 1e-12);
    }
}

TEST_CASE("grid cells satisfy the recursion identity everywhere") {
    const ServiceField f{37};
    auto alpha = [](std::int64_t x) { return x % 3 == 0 ? 0.5 : 1.0; };
    const Interval box{-2, 14};
    const auto grid = passage_grid(alpha, f, {0, 0}, {12, 10}, &box);
    CounterStream rng(404);
    int checked = 0;
    while (checked < 1000) {
        const auto j = static_cast<std::int64_t>(rng.next_index(11));
        const std::int64_t i = grid.row_lo(j) + static_cast<std::int64_t>(
                                                    rng.next_index(static_cast<std::uint64_t>(grid.row_hi(j) - grid.row_lo(j) + 1)));
        const double here = grid.at(i, j);
        if (here == -std::numeric_limits<double>::infinity()) continue;
        double best = std::max(grid.at(i - 1, j), grid.at(i + 1, j - 1));
        if (i == 0 && j == 0) best = std::max(best, 0.0);
        CHECK(here == f(i, j) / alpha(i) + best);
        ++checked;
    }
    CHECK(grid.result() == restricted_passage_time(alpha, f, box, {0, 0}, {12, 10}));
}

TEST_CASE("increasing one service value never lowers a passage time") {
    const ServiceField base{43};
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        CounterStream rng(mix2(6, trial));
        const auto bi = static_cast<std::int64_t>(rng.next_index(5));
        const auto bj = static_cast<std::int64_t>(rng.next_index(5));
        auto bumped = [&](std::int64_t i, std::int64_t j) {
            return base(i, j) + (i == bi && j == bj ? 1.0 : 0.0);
        };
        for (const Point to : {Point{4, 4}, Point{2, 5}, Point{6, 2}}) {
            const double before = passage_time(unit_rate, base, {0, 0}, to);
            const double after = passage_time(unit_rate, bumped, {0, 0}, to);
            CHECK(after >= before - 1e-12);
        }
    }
}

TEST_CASE("serial reference and wavefront kernel are bit-identical") {
    const ServiceField f{53};
    auto alpha = [](std::int64_t x) { return 0.6 + 0.4 * ((x & 1) == 0); };
    CHECK(passage_time(alpha, f, {0, 0}, {50, 70}, DpKernel::serial_reference) ==
          passage_time(alpha, f, {0, 0}, {50, 70}, DpKernel::wavefront));
    const Interval box{-3, 20};
    CHECK(restricted_passage_time(alpha, f, box, {0, 0}, {15, 40}, DpKernel::serial_reference) ==
          restricted_passage_time(alpha, f, box, {0, 0}, {15, 40}, DpKernel::wavefront));
}

TEST_CASE("reconstructed optimal path reproduces its passage time") {
    const ServiceField f{59};
    const auto grid = passage_grid(unit_rate, f, {0, 0}, {6, 6});
    const auto path = grid.optimal_path();
    double total = 0.0;
    for (const auto& p : path) total += f(p.x, p.y);
    CHECK(total == doctest::Approx(grid.result()).epsilon(1e-12));
    // ties break toward the horizontal predecessor: the path is reproducible
    CHECK(grid.optimal_path() == path);
}

// ---------------------------------------------------------------------------
// open-boundary recursion (labeled initial conditions)
// ---------------------------------------------------------------------------

namespace {

// Discrete-event oracle: services (i,j) start when particle j sits at i and
// site i+1 is free (reservoir rules at the ends), and last Y(i,j)/alpha(i).
// Completion times are produced strictly in time order.
std::map<std::pair<std::int64_t, std::int64_t>, double> simulate_open_events(
    const std::function<double(std::int64_t)>& alpha,
    const std::function<double(std::int64_t, std::int64_t)>& service, Interval box, std::int64_t labels) {
    std::map<std::pair<std::int64_t, std::int64_t>, double> done; // (i,j) -> completion
    auto completed = [&](std::int64_t i, std::int64_t j) {
        if (j < 0) return 0.0; // labels below zero started past the right edge
        const auto it = done.find({i, j});
        return it == done.end() ? -1.0 : it->second;
    };
    // active services: (i,j) -> end time
    std::map<std::pair<std::int64_t, std::int64_t>, double> active;
    auto try_start = [&](std::int64_t i, std::int64_t j, double now) {
        if (i < box.lo || i > box.hi || j < 0 || j >= labels) return;
        if (done.count({i, j}) || active.count({i, j})) return;
        const double arrived = i == box.lo ? 0.0 : completed(i - 1, j);
        if (arrived < 0.0) return;
        const double vacated = i == box.hi ? 0.0 : completed(i + 1, j - 1);
        if (vacated < 0.0) return;
        const double start = std::max({arrived, vacated, 0.0});
        (void)now;
        active[{i, j}] = start + service(i, j) / alpha(i);
    };
    for (std::int64_t j = 0; j < labels; ++j) try_start(box.lo, j, 0.0);
    try_start(box.lo + 1, 0, 0.0); // nothing blocks label 0
    while (!active.empty()) {
        auto best = active.begin();
        for (auto it = active.begin(); it != active.end(); ++it)
            if (it->second < best->second) best = it;
        const auto [cell, t] = *best;
        active.erase(best);
        done[cell] = t;
        try_start(cell.first + 1, cell.second, t); // this particle moves on
        try_start(cell.first - 1, cell.second + 1, t); // the follower is unblocked
    }
    return done;
}

} // namespace

TEST_CASE("open recursion with the stack initial condition recovers restricted times") {
    const ServiceField f{61};
    auto alpha = [](std::int64_t x) { return x % 2 == 0 ? 1.0 : 0.6; };
    const Interval box{0, 4};
    auto stack_sigma0 = [&](std::int64_t j) { return j >= 0 ? box.lo : box.hi + 1; };
    const auto table = open_lpp_passage(alpha, f, box, stack_sigma0, 0, 8);
    for (std::int64_t j = 0; j <= 8; ++j)
        for (std::int64_t i = box.lo; i <= box.hi; ++i)
            CHECK(table.at(i, j) ==
                  doctest::Approx(restricted_passage_time(alpha, f, box, {box.lo, 0}, {i, j})).epsilon(1e-12));
}

TEST_CASE("open recursion: everyone already through means all times vanish") {
    const ServiceField f{67};
    const Interval box{0, 3};
    const auto table = open_lpp_passage(unit_rate, f, box, [&](std::int64_t) { return box.hi + 1; }, 0, 5);
    for (std::int64_t j = 0; j <= 5; ++j)
        for (std::int64_t i = 0; i <= 3; ++i) CHECK(table.at(i, j) == 0.0);
}

TEST_CASE("open recursion rejects bad initial labelings") {
    const ServiceField f{71};
    const Interval box{0, 3};
    auto increasing = [&](std::int64_t j) { return j >= 1 ? box.lo + 1 : box.lo; };
    CHECK_THROWS_AS(open_lpp_passage(unit_rate, f, box, increasing, 1, 3), validation_error);
    auto out_of_range = [&](std::int64_t) { return box.hi + 2; };
    CHECK_THROWS_AS(open_lpp_passage(unit_rate, f, box, out_of_range, 0, 3), validation_error);
}

TEST_CASE("particle readout matches the discrete-event oracle") {
    const ServiceField f{73};
    auto alpha = [](std::int64_t x) { return x == 2 ? 0.5 : 1.0; };
    const Interval box{0, 3};
    const std::int64_t labels = 6;
    auto stack_sigma0 = [&](std::int64_t j) { return j >= 0 ? box.lo : box.hi + 1; };
    const auto table = open_lpp_passage(alpha, f, box, stack_sigma0, 0, labels - 1);
    auto events = simulate_open_events(alpha, f, box, labels);

    for (std::int64_t j = 0; j < labels; ++j)
        for (std::int64_t i = box.lo; i <= box.hi; ++i)
            CHECK(table.at(i, j) == doctest::Approx(events.at({i, j})).epsilon(1e-12));

    for (double t : {0.3, 1.0, 2.5, 6.0, 15.0})
        for (std::int64_t j = 0; j < labels; ++j) {
            std::int64_t pos = box.lo;
            while (pos <= box.hi && events.at({pos, j}) <= t) ++pos;
            CHECK(table.position(j, t) == pos);
        }
}

// ---------------------------------------------------------------------------
// vertical times and the shape estimator
// ---------------------------------------------------------------------------

TEST_CASE("normalized vertical time approaches the reciprocal current") {
    const ServiceField f{79};
    // two particle sites, homogeneous: stationary current 2/5
    const double est = t_infinity_estimate(unit_rate, f, {0, 2}, 0, 200'000);
    CHECK(std::fabs(est - 2.5) <= 0.025);

    // a single column is a plain law of large numbers
    auto alpha = [](std::int64_t) { return 0.7; };
    const double one_col = t_infinity_estimate(alpha, f, {5, 5}, 5, 100'000);
    CHECK(std::fabs(one_col - 1.0 / 0.7) <= 0.02 / 0.7);

    // the anchor column does not matter
    const double a = t_infinity_estimate(unit_rate, f, {0, 4}, 0, 200'000);
    const double b = t_infinity_estimate(unit_rate, ServiceField{80}, {0, 4}, 3, 200'000);
    CHECK(std::fabs(a - b) / a <= 0.02);
}

TEST_CASE("shape estimator: boundary ray and scaling laws") {
    DisorderSpec clean;
    clean.r = 0.5;
    clean.R = 0.5;
    clean.epsilon = 0.0;

    const auto edge = shape_estimate(clean, 1.0, 0.0, 2000, 8, 15);
    CHECK(std::fabs(edge.value - 1.0) <= 0.02);

    // pathwise superadditivity: a two-leg split can never beat the direct time
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const ServiceField f{mix2(31, seed)};
        const double whole = passage_time(unit_rate, f, {0, 0}, {120, 120});
        const double first = passage_time(unit_rate, f, {0, 0}, {60, 60});
        const double second = passage_time(unit_rate, f, {60, 60}, {120, 120});
        CHECK(whole >= first + second - 1e-10);
    }

    // positive 1-homogeneity at matched lattice size
    const auto direct = shape_estimate(clean, 2.0, 2.0, 400, 24, 16);
    const auto doubled = shape_estimate(clean, 1.0, 1.0, 800, 24, 17);
    const double pooled = std::hypot(direct.stderr_, 2.0 * doubled.stderr_);
    CHECK(std::fabs(direct.value - 2.0 * doubled.value) <= 3.0 * pooled + 0.02);

    CHECK_THROWS_AS(shape_estimate(clean, -2.0, 1.0, 100, 2, 1), validation_error);
    CHECK_THROWS_AS(shape_estimate(clean, 1.0, 1.0, 1 << 20, 2, 1, /*cell_budget=*/1 << 20), budget_error);
}

// ---------------------------------------------------------------------------
// skeletons
// ---------------------------------------------------------------------------

TEST_CASE("skeleton counts: stars and bars with the leftward correction") {
    CHECK(skeleton_count(2, 3, 3, +1) == 20); // C(6,3)
    CHECK(skeleton_count(2, 3, 0, +1) == 1);
    CHECK(skeleton_count(2, 2, 2, -1) == 0); // needs total 3 < 2*2
    CHECK(skeleton_count(2, 2, 3, -1) == 1);

    const auto all = enumerate_skeletons(2, 3, 3, +1);
    CHECK(all.size() == 20);
    std::set<std::vector<std::int64_t>> unique_keys;
    for (const auto& s : all) {
        std::vector<std::int64_t> key = s.cross_gain;
        key.insert(key.end(), s.interface_gain.begin(), s.interface_gain.end());
        std::int64_t total = 0;
        for (auto v : key) total += v;
        CHECK(total == 3);
        unique_keys.insert(key);
    }
    CHECK(unique_keys.size() == 20);

    CHECK(enumerate_skeletons(2, 3, 0, +1).size() == 1);
    CHECK(enumerate_skeletons(2, 2, 2, -1).empty());
    for (const auto& s : enumerate_skeletons(2, 3, 8, -1))
        for (auto rise : s.cross_gain) CHECK(rise >= 3);

    CHECK_THROWS_AS(enumerate_skeletons(3, 2, 30, +1, /*cap=*/10), budget_error);
}

TEST_CASE("two-scale decomposition equals the direct restricted time") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const ServiceField f{mix2(888, seed)};
        auto alpha = [seed](std::int64_t x) {
            return 0.5 + 0.5 * bits_to_unit_open(mix3(310 + seed, 1, static_cast<std::uint64_t>(x)));
        };
        for (std::int64_t yp : {0, 2, 4})
            CHECK(skeleton_decomposition_check(alpha, f, 6, 3, yp, +1).equal(1e-9));
        for (std::int64_t yp : {5, 7, 9})
            CHECK(skeleton_decomposition_check(alpha, f, 6, 3, yp, -1).equal(1e-9));
    }

    // a flat crossing is the all-horizontal skeleton on the last row
    const ServiceField f{999};
    const auto flat = skeleton_decomposition_check(unit_rate, f, 6, 3, 0, +1);
    CHECK(flat.skeletons == 1);
    CHECK(flat.direct ==
          doctest::Approx(restricted_passage_time(unit_rate, f, {0, 5}, {0, 0}, {5, 0})).epsilon(1e-12));
}

TEST_CASE("crossing and interface legs read disjoint service cells") {
    for (int sigma : {+1, -1})
        for (std::int64_t yp : {sigma > 0 ? 3 : 7, sigma > 0 ? 4 : 8}) {
            for (const auto& skel : enumerate_skeletons(2, 3, yp, sigma)) {
                std::set<std::pair<std::int64_t, std::int64_t>> owned;
                std::size_t total = 0;
                for (const auto& leg : skeleton_geometry(6, 3, skel)) {
                    for (const auto& c : reachable_cells(leg.u_from, leg.u_to, &leg.u_box)) {
                        owned.insert({c.x, c.y});
                        ++total;
                    }
                    for (const auto& c : reachable_cells(leg.v_from, leg.v_to, &leg.v_box)) {
                        owned.insert({c.x, c.y});
                        ++total;
                    }
                }
                CHECK(owned.size() == total); // no cell claimed twice
            }
        }
}

TEST_CASE("block crossing times: row means, envelope bound, leftward staircase") {
    const Environment ones = make_environment({0, 63}, std::vector<double>(64, 1.0));

    // flat crossing is a plain sum of 64 unit exponentials over 64
    const auto flat = tau_block(ones, {0, 63}, +1, 0.0, 400, 7);
    CHECK(std::fabs(flat.value - 1.0) <= 3.0 * flat.stderr_);

    // diagonal crossing stays below the asymptotic-shape value
    const auto diag = tau_block(ones, {0, 63}, +1, 1.0, 200, 8);
    CHECK(diag.value <= 5.8284271247461903 + 3.0 * diag.stderr_);

    // leftward staircase at the smallest block: mean of the 5-path maximum
    const Environment four = make_environment({0, 3}, std::vector<double>(4, 1.0));
    const auto left = tau_block(four, {0, 3}, -1, 1.0, 4000, 9);
    std::vector<double> brute;
    for (int rep = 0; rep < 4000; ++rep) {
        const ServiceField f{derive_seed(9, "tau-block", static_cast<std::uint64_t>(rep))};
        brute.push_back(test::enumerate_passage(unit_rate, f, {3, 0}, {0, 4}, Interval{0, 3}) / 4.0);
    }
    CHECK(left.value == doctest::Approx(test::mean(brute)).epsilon(1e-12));
    CHECK(left.value <= 1.0 + 3.0 * left.stderr_);

    CHECK_THROWS_AS(tau_block(four, {0, 3}, -1, 0.5, 4, 1), validation_error);
}
