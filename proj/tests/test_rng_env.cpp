#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <unordered_set>

#include "taseplab/disorder.hpp"
#include "taseplab/errors.hpp"
#include "taseplab/lpp.hpp"
#include "taseplab/rng.hpp"

using namespace taseplab;

// The counter construction must never change silently: simulations are
// replayed from seeds alone.
TEST_CASE("mixer output is stable across builds") {
    CHECK(mix2(0, 0) == 9048247064618004702ULL);
    CHECK(mix2(1, 2) == 11045130339233787057ULL);
    CHECK(derive_seed(42, "flux-env", 7) == 7454661975401189476ULL);
}

TEST_CASE("unit-interval mapping excludes zero and stays in (0,1]") {
    CHECK(bits_to_unit_open(0) > 0.0);
    CHECK(bits_to_unit_open(~0ULL) <= 1.0);
    CHECK(std::isfinite(exp_from_bits(0)));
}

TEST_CASE("derived seeds: determinism, collisions, avalanche") {
    CHECK(derive_seed(5, "a", 1) == derive_seed(5, "a", 1));
    CHECK(derive_seed(5, "a", 1) != derive_seed(5, "b", 1));

    std::unordered_set<std::uint64_t> seen;
    seen.reserve(2'000'000);
    for (std::uint64_t i = 0; i < 1'000'000; ++i) seen.insert(derive_seed(123, "collision", i));
    CHECK(seen.size() == 1'000'000);

    double flipped = 0.0;
    for (std::uint64_t i = 0; i < 10'000; ++i)
        flipped += std::popcount(derive_seed(9, "avalanche", i) ^ derive_seed(9, "avalanche", i + 1));
    CHECK(flipped / 10'000 >= 20.0);
}

TEST_CASE("service field is Exp(1) with independent coordinates") {
    const ServiceField field{77};
    const int n = 1'000'000;
    double sum = 0.0, sum_sq = 0.0, cross = 0.0;
    for (int i = 0; i < n; ++i) {
        const double a = field(i, 0), b = field(i, 1);
        sum += a;
        sum_sq += a * a;
        cross += (a - 1.0) * (b - 1.0);
    }
    const double m = sum / n;
    CHECK(std::fabs(m - 1.0) <= 3e-3); // 3 sigma of the Exp(1) mean
    CHECK(std::fabs(sum_sq / n - 2.0) <= 2e-2);
    CHECK(std::fabs(cross / n) <= 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("environments: degenerate dilution values") {
    DisorderSpec spec;
    spec.r = 0.5;
    spec.R = 0.5;

    spec.epsilon = 0.0;
    for (double a : sample_environment(spec, {0, 99}).rates) CHECK(a == 1.0);

    spec.epsilon = 1.0;
    for (double a : sample_environment(spec, {0, 99}).rates) CHECK(a == 0.5);
}

TEST_CASE("defect fraction matches the dilution at three sigma") {
    DisorderSpec spec;
    spec.r = 0.3;
    spec.R = 0.3;
    spec.epsilon = 0.5;
    spec.seed = 2024;
    const Environment env = sample_environment(spec, {0, 999'999});
    std::int64_t defects = 0;
    for (double a : env.rates) defects += a != 1.0;
    CHECK(std::fabs(defects / 1e6 - 0.5) <= 0.0015);
}

TEST_CASE("rates are a pure function of (seed, site)") {
    DisorderSpec spec;
    spec.r = 0.4;
    spec.R = 0.8;
    spec.epsilon = 0.3;
    spec.q_kind = QKind::uniform_on_r_R;
    spec.seed = 5;
    const Environment wide = sample_environment(spec, {-50, 80});
    const Environment narrow = sample_environment(spec, {0, 30});
    for (std::int64_t x = 0; x <= 30; ++x) CHECK(wide.rate(x) == narrow.rate(x));
    const Environment again = sample_environment(spec, {0, 30});
    CHECK(again.rates == narrow.rates);
    for (double a : wide.rates) CHECK((a == 1.0 || (a >= spec.r && a <= spec.R)));
}

TEST_CASE("power-tail mass near the lower edge scales like u^kappa") {
    DisorderSpec spec;
    spec.r = 0.5;
    spec.R = 0.9;
    spec.epsilon = 1.0;
    spec.q_kind = QKind::power_tail;
    spec.kappa = 2.0;
    spec.seed = 31;
    const Environment env = sample_environment(spec, {0, 499'999});
    for (double u : {0.02, 0.05, 0.1}) {
        std::int64_t hits = 0;
        for (double a : env.rates) hits += a < spec.r + u;
        const double expected = std::pow(u / (spec.R - spec.r), spec.kappa);
        const double band = 3.0 * std::sqrt(expected / 5e5);
        CHECK(static_cast<double>(hits) / 5e5 <= expected + band);
        CHECK(static_cast<double>(hits) / 5e5 >= expected - band);
    }
    CHECK(spec.tail_assumption_verified());
    spec.q_kind = QKind::uniform_on_r_R;
    CHECK_FALSE(spec.tail_assumption_verified());
}

TEST_CASE("spec JSON round-trips and rejects junk") {
    DisorderSpec spec;
    spec.r = 0.25;
    spec.R = 0.75;
    spec.epsilon = 0.1;
    spec.q_kind = QKind::power_tail;
    spec.kappa = 1.5;
    spec.seed = 99;
    const DisorderSpec back = DisorderSpec::from_json(spec.to_json());
    CHECK(back.r == spec.r);
    CHECK(back.R == spec.R);
    CHECK(back.epsilon == spec.epsilon);
    CHECK(back.kappa == spec.kappa);
    CHECK(back.seed == spec.seed);
    CHECK(back.q_kind == spec.q_kind);

    CHECK_THROWS_AS(DisorderSpec::from_json(R"({"r":0.5,"R":0.5,"epsilon":0,"q_kind":"point_mass_at_r","seed":0,"extra":1})"),
                    validation_error);
    CHECK_THROWS_WITH_AS(DisorderSpec::from_json(R"({"r":0.0})"), doctest::Contains("r"), validation_error);
    CHECK_THROWS_WITH_AS(DisorderSpec::from_json(R"({"r":0.5,"R":0.4})"), doctest::Contains("R"), validation_error);
    CHECK_THROWS_WITH_AS(DisorderSpec::from_json(R"({"epsilon":1.5})"), doctest::Contains("epsilon"),
                         validation_error);
    CHECK_THROWS_WITH_AS(DisorderSpec::from_json(R"({"q_kind":"power_tail","kappa":0.5})"),
                         doctest::Contains("kappa"), validation_error);

    DisorderSpec bad;
    bad.epsilon = 2.0;
    CHECK_THROWS_AS(sample_environment(bad, {0, 3}), validation_error);
    CHECK_THROWS_AS(sample_environment(spec, {5, 4}), validation_error);
}
