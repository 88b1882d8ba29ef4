#ifndef TASEPLAB_TASEP_HPP
#define TASEPLAB_TASEP_HPP

#include <cstdint>
#include <vector>

#include "taseplab/disorder.hpp"

namespace taseplab {

enum class Topology { ring, open_segment };

struct ParticleConfig {
    Topology topology = Topology::ring;
    std::vector<std::uint8_t> occupancy;

    std::int64_t size() const { return static_cast<std::int64_t>(occupancy.size()); }
    std::int64_t particle_count() const;
};

// floor(rho*L + 1/2) particles at maximally even positions floor(k*L/n).
ParticleConfig initial_profile(double density, std::int64_t L);

// One ring run. Bond x is the jump x -> x+1 (mod L); counts cover the
// measurement window after burn-in.
struct RingRunRecord {
    std::int64_t L = 0;
    std::int64_t particles = 0;
    double measured_time = 0.0;
    std::vector<std::int64_t> bond_jumps;
    double flux = 0.0; // space-time averaged current
    std::int64_t events = 0;

    // conservation diagnostics filled at the end of the run
    std::int64_t particles_final = 0;
    std::int64_t max_bond_count_spread = 0;
};

// Event-driven kernel (rate-1 thinning over the active sites).
RingRunRecord simulate_ring(const Environment& env, double density, double t_max,
                            std::uint64_t seed, double burn_in_fraction = 0.5);
RingRunRecord simulate_ring(const Environment& env, const ParticleConfig& init, double t_max,
                            std::uint64_t seed, double burn_in_fraction = 0.5);

// Serial reference: every site carries a rate-1 Poisson mark stream derived
// from (seed, site, k); a mark fires a jump iff the exclusion rule permits
// and its uniform lies below alpha(site). Two environments driven by the
// same seed share the same marks, which makes pathwise current monotonicity
// in the rates an assertable statement. Returns cumulative bond counts at
// each checkpoint time.
std::vector<std::vector<std::int64_t>> simulate_ring_marks(const Environment& env,
                                                           const ParticleConfig& init,
                                                           const std::vector<double>& checkpoints,
                                                           std::uint64_t seed);

// Open segment with N particle sites; rates = (entry, hops..., exit), N+1 bonds.
struct OpenRunRecord {
    double measured_time = 0.0;
    std::vector<double> bond_currents; // per-bond time averages over the window
    double mean_current = 0.0;         // space average
    double half_width_99 = 0.0;        // batch means, 99% two-sided
    double bond_spread = 0.0;
    std::int64_t events = 0;
};

OpenRunRecord simulate_open_rates(const std::vector<double>& rates, double t_max,
                                  std::uint64_t seed, double burn_in_fraction = 0.5,
                                  int batches = 20);

// box is the disorder box [x1-1, x2] of an open segment on [x1, x2]:
// entry rate env(box.lo), exit rate env(box.hi).
OpenRunRecord simulate_open(const Environment& env, Interval box, double t_max,
                            std::uint64_t seed, double burn_in_fraction = 0.5);

struct FluxSample {
    double rho = 0.0;
    double flux = 0.0;
    double stderr_ = 0.0;
};

struct FluxCurveResult {
    std::vector<FluxSample> samples;
    double symmetry_defect = 0.0;     // max over complementary pairs of |f(rho)-f(1-rho)|
    double symmetry_pooled_se = 0.0;  // pooled stderr of the worst pair
    std::int64_t L = 0;
    double t_max = 0.0;
    int replicas = 0;
    std::uint64_t seed = 0;
};

// Quenched-averaged flux estimates; the same disorder replicas are used for
// every density so complementary densities are directly comparable.
FluxCurveResult flux_curve(const DisorderSpec& spec, const std::vector<double>& densities,
                           std::int64_t L, double t_max, int replicas, std::uint64_t seed);

} // namespace taseplab

#endif
