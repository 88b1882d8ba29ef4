#include "taseplab/tasep.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "taseplab/errors.hpp"
#include "taseplab/parallel.hpp"
#include "taseplab/rng.hpp"

namespace taseplab {

std::int64_t ParticleConfig::particle_count() const {
    std::int64_t n = 0;
    for (auto v : occupancy) n += v;
    return n;
}

ParticleConfig initial_profile(double density, std::int64_t L) {
    if (!(density >= 0.0 && density <= 1.0)) throw validation_error("initial_profile: density outside [0,1]");
    if (L < 1) throw validation_error("initial_profile: L must be positive");
    ParticleConfig cfg;
    cfg.topology = Topology::ring;
    cfg.occupancy.assign(static_cast<std::size_t>(L), 0);
    const auto n = static_cast<std::int64_t>(std::floor(density * static_cast<double>(L) + 0.5));
    for (std::int64_t k = 0; k < n; ++k) {
        const auto pos = static_cast<std::int64_t>((static_cast<__int128>(k) * L) / n);
        cfg.occupancy[static_cast<std::size_t>(pos)] = 1;
    }
    return cfg;
}

namespace {

// occupied site with an empty right neighbour
struct ActiveSet {
    std::vector<std::int32_t> list;
    std::vector<std::int32_t> slot; // -1 when inactive

    explicit ActiveSet(std::int64_t L) : slot(static_cast<std::size_t>(L), -1) {}

    void insert(std::int32_t x) {
        if (slot[static_cast<std::size_t>(x)] >= 0) return;
        slot[static_cast<std::size_t>(x)] = static_cast<std::int32_t>(list.size());
        list.push_back(x);
    }
    void erase(std::int32_t x) {
        const std::int32_t at = slot[static_cast<std::size_t>(x)];
        if (at < 0) return;
        const std::int32_t last = list.back();
        list[static_cast<std::size_t>(at)] = last;
        slot[static_cast<std::size_t>(last)] = at;
        list.pop_back();
        slot[static_cast<std::size_t>(x)] = -1;
    }
    std::int64_t size() const { return static_cast<std::int64_t>(list.size()); }
};

} // namespace

RingRunRecord simulate_ring(const Environment& env, double density, double t_max,
                            std::uint64_t seed, double burn_in_fraction) {
    return simulate_ring(env, initial_profile(density, env.window.length()), t_max, seed, burn_in_fraction);
}

RingRunRecord simulate_ring(const Environment& env, const ParticleConfig& init, double t_max,
                            std::uint64_t seed, double burn_in_fraction) {
    const std::int64_t L = env.window.length();
    if (L < 2) throw validation_error("simulate_ring: ring length must be at least 2");
    if (!(t_max > 0.0)) throw validation_error("simulate_ring: t_max must be positive");
    if (init.size() != L) throw validation_error("simulate_ring: configuration/environment length mismatch");

    std::vector<std::uint8_t> occ = init.occupancy;
    ActiveSet active(L);
    auto right = [L](std::int64_t x) { return x + 1 < L ? x + 1 : std::int64_t{0}; };
    auto left = [L](std::int64_t x) { return x > 0 ? x - 1 : L - 1; };
    for (std::int64_t x = 0; x < L; ++x)
        if (occ[static_cast<std::size_t>(x)] && !occ[static_cast<std::size_t>(right(x))])
            active.insert(static_cast<std::int32_t>(x));

    RingRunRecord rec;
    rec.L = L;
    rec.particles = init.particle_count();
    rec.bond_jumps.assign(static_cast<std::size_t>(L), 0);

    const double t_burn = t_max * burn_in_fraction;
    CounterStream rng(seed);
    double t = 0.0;
    while (active.size() > 0) {
        const auto n = active.size();
        t += -std::log(rng.next_unit_open()) / static_cast<double>(n);
        if (t >= t_max) break;
        // one draw picks the proposal and, through its fractional part,
        // the thinning uniform
        const double u = rng.next_unit_open() * static_cast<double>(n);
        auto idx = static_cast<std::int64_t>(u);
        if (idx == n) --idx;
        const double accept = u - static_cast<double>(idx);
        const std::int64_t x = active.list[static_cast<std::size_t>(idx)];
        ++rec.events;
        if (accept > env.rates[static_cast<std::size_t>(x)]) continue;

        const std::int64_t xr = right(x), xl = left(x);
        occ[static_cast<std::size_t>(x)] = 0;
        occ[static_cast<std::size_t>(xr)] = 1;
        if (t >= t_burn) ++rec.bond_jumps[static_cast<std::size_t>(x)];
        active.erase(static_cast<std::int32_t>(x));
        if (occ[static_cast<std::size_t>(xl)]) active.insert(static_cast<std::int32_t>(xl));
        if (!occ[static_cast<std::size_t>(right(xr))]) active.insert(static_cast<std::int32_t>(xr));
    }

    rec.measured_time = t_max - t_burn;
    std::int64_t total = 0;
    for (auto c : rec.bond_jumps) total += c;
    rec.flux = static_cast<double>(total) / static_cast<double>(L) / rec.measured_time;
    const auto [mn, mx] = std::minmax_element(rec.bond_jumps.begin(), rec.bond_jumps.end());
    rec.max_bond_count_spread = *mx - *mn;
    for (auto v : occ) rec.particles_final += v;
    return rec;
}

std::vector<std::vector<std::int64_t>> simulate_ring_marks(const Environment& env,
                                                           const ParticleConfig& init,
                                                           const std::vector<double>& checkpoints,
                                                           std::uint64_t seed) {
    const std::int64_t L = env.window.length();
    if (init.size() != L) throw validation_error("simulate_ring_marks: length mismatch");
    if (checkpoints.empty() || !std::is_sorted(checkpoints.begin(), checkpoints.end()))
        throw validation_error("simulate_ring_marks: checkpoints must be sorted and non-empty");

    std::vector<std::uint8_t> occ = init.occupancy;
    std::vector<std::int64_t> counts(static_cast<std::size_t>(L), 0);
    std::vector<std::uint64_t> mark_index(static_cast<std::size_t>(L), 0);

    // (next mark time, site); streams are site-indexed counters so two runs
    // with the same seed see identical marks regardless of the rates
    using Ev = std::pair<double, std::int64_t>;
    std::priority_queue<Ev, std::vector<Ev>, std::greater<>> queue;
    auto mark_gap = [&](std::int64_t x, std::uint64_t k) {
        return exp_from_bits(mix3(seed, static_cast<std::uint64_t>(x) * 2 + 0, k));
    };
    auto mark_u = [&](std::int64_t x, std::uint64_t k) {
        return bits_to_unit_open(mix3(seed, static_cast<std::uint64_t>(x) * 2 + 1, k));
    };
    for (std::int64_t x = 0; x < L; ++x) queue.emplace(mark_gap(x, 0), x);

    std::vector<std::vector<std::int64_t>> out;
    std::size_t next_cp = 0;
    const double t_end = checkpoints.back();
    while (!queue.empty()) {
        const auto [t, x] = queue.top();
        if (t > t_end) break;
        queue.pop();
        while (next_cp < checkpoints.size() && checkpoints[next_cp] < t) {
            out.push_back(counts);
            ++next_cp;
        }
        const std::uint64_t k = mark_index[static_cast<std::size_t>(x)]++;
        const std::int64_t xr = x + 1 < L ? x + 1 : 0;
        if (occ[static_cast<std::size_t>(x)] && !occ[static_cast<std::size_t>(xr)] &&
            mark_u(x, k) <= env.rates[static_cast<std::size_t>(x)]) {
            occ[static_cast<std::size_t>(x)] = 0;
            occ[static_cast<std::size_t>(xr)] = 1;
            ++counts[static_cast<std::size_t>(x)];
        }
        queue.emplace(t + mark_gap(x, k + 1), x);
    }
    while (next_cp < checkpoints.size()) {
        out.push_back(counts);
        ++next_cp;
    }
    return out;
}

OpenRunRecord simulate_open_rates(const std::vector<double>& rates, double t_max,
                                  std::uint64_t seed, double burn_in_fraction, int batches) {
    const auto bonds = static_cast<std::int64_t>(rates.size());
    const std::int64_t N = bonds - 1;
    if (N < 1) throw validation_error("simulate_open: need at least one particle site");
    if (!(t_max > 0.0)) throw validation_error("simulate_open: t_max must be positive");
    for (double a : rates)
        if (!(a >= 0.0 && a <= 1.0)) throw validation_error("simulate_open: rates must lie in [0,1]");

    // bond b: 0 entry, 1..N-1 internal (site b -> b+1), N exit
    std::vector<std::uint8_t> occ(static_cast<std::size_t>(N + 2), 0); // 1-based sites, padding
    ActiveSet active(bonds);
    auto bond_enabled = [&](std::int64_t b) {
        if (b == 0) return occ[1] == 0;
        if (b == N) return occ[static_cast<std::size_t>(N)] == 1;
        return occ[static_cast<std::size_t>(b)] == 1 && occ[static_cast<std::size_t>(b + 1)] == 0;
    };
    auto refresh = [&](std::int64_t b) {
        if (b < 0 || b > N) return;
        if (bond_enabled(b)) active.insert(static_cast<std::int32_t>(b));
        else active.erase(static_cast<std::int32_t>(b));
    };
    for (std::int64_t b = 0; b <= N; ++b) refresh(b);

    const double t_burn = t_max * burn_in_fraction;
    const double window = t_max - t_burn;
    const double batch_len = window / batches;
    std::vector<std::int64_t> jumps(static_cast<std::size_t>(bonds), 0);
    std::vector<std::int64_t> batch_jumps(static_cast<std::size_t>(batches), 0);

    OpenRunRecord rec;
    CounterStream rng(seed);
    double t = 0.0;
    while (active.size() > 0) {
        const auto n = active.size();
        t += -std::log(rng.next_unit_open()) / static_cast<double>(n);
        if (t >= t_max) break;
        const double u = rng.next_unit_open() * static_cast<double>(n);
        auto idx = static_cast<std::int64_t>(u);
        if (idx == n) --idx;
        const double accept = u - static_cast<double>(idx);
        const std::int64_t b = active.list[static_cast<std::size_t>(idx)];
        ++rec.events;
        if (accept > rates[static_cast<std::size_t>(b)]) continue;

        if (b == 0) occ[1] = 1;
        else if (b == N) occ[static_cast<std::size_t>(N)] = 0;
        else {
            occ[static_cast<std::size_t>(b)] = 0;
            occ[static_cast<std::size_t>(b + 1)] = 1;
        }
        if (t >= t_burn) {
            ++jumps[static_cast<std::size_t>(b)];
            auto batch = static_cast<std::int64_t>((t - t_burn) / batch_len);
            if (batch >= batches) batch = batches - 1;
            ++batch_jumps[static_cast<std::size_t>(batch)];
        }
        refresh(b - 1);
        refresh(b);
        refresh(b + 1);
    }

    rec.measured_time = window;
    rec.bond_currents.resize(static_cast<std::size_t>(bonds));
    double total = 0.0;
    for (std::int64_t b = 0; b <= N; ++b) {
        rec.bond_currents[static_cast<std::size_t>(b)] = static_cast<double>(jumps[static_cast<std::size_t>(b)]) / window;
        total += static_cast<double>(jumps[static_cast<std::size_t>(b)]);
    }
    rec.mean_current = total / static_cast<double>(bonds) / window;
    const auto [mn, mx] = std::minmax_element(rec.bond_currents.begin(), rec.bond_currents.end());
    rec.bond_spread = *mx - *mn;

    // batch means, t quantile for 19 dof at 99.5%
    double mean = 0.0;
    std::vector<double> bm(static_cast<std::size_t>(batches));
    for (int i = 0; i < batches; ++i) {
        bm[static_cast<std::size_t>(i)] =
            static_cast<double>(batch_jumps[static_cast<std::size_t>(i)]) / static_cast<double>(bonds) / batch_len;
        mean += bm[static_cast<std::size_t>(i)];
    }
    mean /= batches;
    double var = 0.0;
    for (double v : bm) var += (v - mean) * (v - mean);
    var /= (batches - 1);
    const double t_quantile = 2.860935; // batches = 20
    rec.half_width_99 = t_quantile * std::sqrt(var / batches);
    return rec;
}

OpenRunRecord simulate_open(const Environment& env, Interval box, double t_max,
                            std::uint64_t seed, double burn_in_fraction) {
    if (box.length() < 2) throw validation_error("simulate_open: window too small (no particle site)");
    if (!env.window.contains(box.lo) || !env.window.contains(box.hi))
        throw validation_error("simulate_open: box outside environment window");
    std::vector<double> rates;
    for (std::int64_t x = box.lo; x <= box.hi; ++x) rates.push_back(env.rate(x));
    return simulate_open_rates(rates, t_max, seed, burn_in_fraction);
}

FluxCurveResult flux_curve(const DisorderSpec& spec, const std::vector<double>& densities,
                           std::int64_t L, double t_max, int replicas, std::uint64_t seed) {
    spec.validate();
    if (replicas < 1) throw validation_error("flux_curve: replicas must be positive");
    for (double rho : densities)
        if (!(rho >= 0.0 && rho <= 1.0)) throw validation_error("flux_curve: density outside [0,1]");

    const auto D = static_cast<std::int64_t>(densities.size());
    std::vector<double> flux(static_cast<std::size_t>(D * replicas), 0.0);
    // same disorder replicas for every density
    parallel_for(D * replicas, [&](std::int64_t task) {
        const std::int64_t d = task / replicas, rep = task % replicas;
        DisorderSpec local = spec;
        local.seed = derive_seed(seed, "flux-env", static_cast<std::uint64_t>(rep));
        const Environment env = sample_environment(local, Interval{0, L - 1});
        const auto dyn = derive_seed(seed, "flux-dyn", static_cast<std::uint64_t>(task));
        flux[static_cast<std::size_t>(task)] = simulate_ring(env, densities[static_cast<std::size_t>(d)], t_max, dyn).flux;
    });

    FluxCurveResult out;
    out.L = L;
    out.t_max = t_max;
    out.replicas = replicas;
    out.seed = seed;
    for (std::int64_t d = 0; d < D; ++d) {
        double mean = 0.0;
        for (int rep = 0; rep < replicas; ++rep) mean += flux[static_cast<std::size_t>(d * replicas + rep)];
        mean /= replicas;
        double var = 0.0;
        for (int rep = 0; rep < replicas; ++rep) {
            const double v = flux[static_cast<std::size_t>(d * replicas + rep)] - mean;
            var += v * v;
        }
        const double se = replicas > 1 ? std::sqrt(var / (replicas - 1) / replicas) : 0.0;
        out.samples.push_back(FluxSample{densities[static_cast<std::size_t>(d)], mean, se});
    }
    for (std::int64_t i = 0; i < D; ++i)
        for (std::int64_t k = i; k < D; ++k) {
            const auto& a = out.samples[static_cast<std::size_t>(i)];
            const auto& b = out.samples[static_cast<std::size_t>(k)];
            if (std::fabs(a.rho + b.rho - 1.0) > 1e-12) continue;
            const double defect = std::fabs(a.flux - b.flux);
            if (defect >= out.symmetry_defect) {
                out.symmetry_defect = defect;
                out.symmetry_pooled_se = std::sqrt(a.stderr_ * a.stderr_ + b.stderr_ * b.stderr_);
            }
        }
    return out;
}

} // namespace taseplab
