#include "verify_suite.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "taseplab/blocks.hpp"
#include "taseplab/concentration.hpp"
#include "taseplab/disorder.hpp"
#include "taseplab/lpp.hpp"
#include "taseplab/maxcurrent.hpp"
#include "taseplab/reference.hpp"
#include "taseplab/renorm.hpp"
#include "taseplab/rng.hpp"
#include "taseplab/tasep.hpp"

namespace taseplab::tools {

namespace {

struct Suite {
    int failures = 0;
    void check(const std::string& name, const std::function<bool()>& body) {
        bool ok = false;
        std::string note;
        try {
            ok = body();
        } catch (const std::exception& e) {
            note = std::string(" (") + e.what() + ")";
        }
        std::printf("%s %s%s\n", ok ? "PASS" : "FAIL", name.c_str(), note.c_str());
        if (!ok) ++failures;
    }
};

} // namespace

int run_verify_suite() {
    Suite s;

    s.check("environment: deterministic and window independent", [] {
        DisorderSpec spec;
        spec.epsilon = 0.3;
        spec.r = 0.4;
        spec.R = 0.4;
        spec.seed = 7;
        const Environment a = sample_environment(spec, {-5, 30});
        const Environment b = sample_environment(spec, {0, 10});
        for (std::int64_t x = 0; x <= 10; ++x)
            if (a.rate(x) != b.rate(x)) return false;
        return true;
    });

    s.check("open system: homogeneous currents are the Catalan ratios", [] {
        const double expected[] = {0.5, 0.4, 5.0 / 14.0, 1.0 / 3.0};
        for (int N = 1; N <= 4; ++N) {
            const auto ec = stationary_current_exact(OpenSystem::homogeneous(N, 1.0));
            if (std::fabs(ec.current - expected[N - 1]) > 1e-10) return false;
            if (ec.bond_spread > 1e-10 || ec.residual > 1e-12) return false;
        }
        return true;
    });

    s.check("ring kinetics: conservation and bond-count spread", [] {
        DisorderSpec spec;
        spec.epsilon = 0.5;
        spec.r = 0.3;
        spec.R = 0.9;
        spec.q_kind = QKind::uniform_on_r_R;
        spec.seed = 3;
        const Environment env = sample_environment(spec, {0, 63});
        const auto rec = simulate_ring(env, 0.5, 200.0, 11);
        return rec.particles == 32 && rec.max_bond_count_spread <= rec.particles;
    });

    s.check("passage times: restriction never gains", [] {
        const ServiceField f{99};
        auto unit = [](std::int64_t) { return 1.0; };
        for (int trial = 0; trial < 10; ++trial) {
            const ServiceField g{mix2(5, static_cast<std::uint64_t>(trial))};
            const double full = passage_time(unit, g, {0, 0}, {6, 5});
            const double boxed = restricted_passage_time(unit, g, {0, 6}, {0, 0}, {6, 5});
            if (boxed > full + 1e-12) return false;
        }
        (void)f;
        return true;
    });

    s.check("passage times: serial and wavefront kernels agree bitwise", [] {
        const ServiceField f{123};
        auto unit = [](std::int64_t) { return 1.0; };
        const double a = passage_time(unit, f, {0, 0}, {40, 30}, DpKernel::serial_reference);
        const double b = passage_time(unit, f, {0, 0}, {40, 30}, DpKernel::wavefront);
        return a == b;
    });

    s.check("skeletons: two-scale decomposition is exact", [] {
        auto unit = [](std::int64_t) { return 1.0; };
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const ServiceField f{mix2(42, seed)};
            if (!skeleton_decomposition_check(unit, f, 6, 3, 3, +1).equal(1e-9)) return false;
            if (!skeleton_decomposition_check(unit, f, 6, 3, 7, -1).equal(1e-9)) return false;
        }
        return true;
    });

    s.check("reference family: duality round-trips", [] {
        const ReferenceParams p{0.3, 0.125};
        const double edge = p.J / p.rho_c;
        SampledCurve k{{-2.0, -edge, 0.0, edge, 2.0}, {}};
        for (double v : k.xs) k.vs.push_back(reference_k(p, v));
        std::vector<double> rgrid;
        for (int i = 0; i <= 1000; ++i) rgrid.push_back(i * 0.001);
        const SampledCurve f = legendre_flux_from_k(k, rgrid);
        for (double rho : rgrid)
            if (std::fabs(eval_pl(f, rho) - reference_flux(p, rho)) > 1e-6) return false;
        return true;
    });

    s.check("envelopes: concavity preserved across one step", [] {
        const ConcaveCurve g1 = g_initial(+1, 12.0);
        const ConcaveCurve g2 = g_step(g1, +1, 0.5, 0.13, 0.3, 12.0);
        g2.validate_concave(1e-9);
        return true;
    });

    s.check("block law: level-1 verdict is the defect indicator", [] {
        RenormParams p;
        p.K1 = 5;
        p.gamma = 0.5;
        p.beta = 4.0;
        p.a = 0.01;
        const ScaleTable scales = build_scales(p, 2);
        const Environment good = make_environment({0, 4}, {1, 1, 1, 1, 1});
        const Environment bad = make_environment({0, 4}, {1, 1, 0.5, 1, 1});
        ClassifyStrategy strategy;
        return classify_block(good, {0, 4}, 1, scales, strategy).verdict == BlockVerdict::good &&
               classify_block(bad, {0, 4}, 1, scales, strategy).reason == BadReason::has_defect;
    });

    s.check("concentration: harmonic mean and normalization", [] {
        if (std::fabs(exp_max_mean(3) - 11.0 / 6.0) > 1e-15) return false;
        const auto norm = subgaussian_shift({std::exp(1.0), 4.0});
        return std::fabs(norm.shift - 2.0) < 1e-12 && std::fabs(norm.scale - 2.0) < 1e-12;
    });

    std::printf(s.failures == 0 ? "verify: all properties hold\n"
                                : "verify: %d propert%s FAILED\n",
                s.failures, s.failures == 1 ? "y" : "ies");
    return s.failures == 0 ? 0 : 1;
}

} // namespace taseplab::tools
