#ifndef TASEPLAB_REFERENCE_HPP
#define TASEPLAB_REFERENCE_HPP

#include <string>
#include <vector>

namespace taseplab {

// Truncated-parabola reference family: a flux that climbs linearly to J at
// rho_c, stays flat on [rho_c, 1-rho_c], and descends symmetrically; its
// convex conjugate; and the matching passage-time / height functions.

struct ReferenceParams {
    double rho_c = 0.25; // in [0, 1/2]
    double J = 0.25;     // >= 0
    void validate() const;
};

double reference_flux(const ReferenceParams& p, double rho);
double reference_k(const ReferenceParams& p, double x);
double reference_tau(const ReferenceParams& p, double x, double y); // y >= x^-
double reference_height(const ReferenceParams& p, double t, double x);

// Sampled curve: strictly increasing abscissas.
struct SampledCurve {
    std::vector<double> xs;
    std::vector<double> vs;
};

struct FluxCurveData {
    std::vector<double> rho;
    std::vector<double> value;
    std::vector<double> stderr_;
    std::string provenance; // simulated | reference | transformed
};

// f(rho) = inf_v [k(v) + v rho] for convex k; exact on piecewise-linear
// input (the infimum sits on a knot of the lower hull). The output carries
// the caller's grid plus the kinks the transform creates, so a second
// transform reproduces a piecewise-linear input exactly.
SampledCurve legendre_flux_from_k(const SampledCurve& k, const std::vector<double>& rho_grid);
// k(v) = sup_rho [f(rho) - v rho] for concave f.
SampledCurve legendre_k_from_flux(const SampledCurve& f, const std::vector<double>& v_grid);

// piecewise-linear evaluation (clamped at the ends)
double eval_pl(const SampledCurve& curve, double x);

// Generalized inverse of a strictly increasing curve, with the output
// clamped below at clamp_lo (crossing levels below the data start).
SampledCurve invert_monotone(const SampledCurve& curve, const std::vector<double>& grid, double clamp_lo = 0.0);

// Limit objects of the vanishing-dilution regime.
struct DiluteTargets {
    double r = 0.0;
    double rho_c0 = 0.0;          // (1 - sqrt(1-r))/2
    double flat_length = 0.0;     // sqrt(1-r)
    double y1_plus = 0.0, y1_minus = 0.0;
    double branch_mismatch = 0.0; // continuity defect measured at construction

    double f0(double rho) const;           // min(rho(1-rho), r/4)
    double tau0(double x, double y) const; // parabola branch below the switching locus
};

DiluteTargets dilute_targets(double r);

struct PlateauEstimate {
    bool found = false;
    double rho_hat = 0.0;
    double uncertainty = 0.0; // grid resolution
    double band = 0.0;
};

// Smallest rho such that every sample in [rho, 1-rho] lies within band of
// r/4. The band must dominate the sampling noise or the answer would be
// meaningless; below the median stderr the call is refused.
PlateauEstimate detect_flat_segment(const FluxCurveData& curve, double r, double band);

} // namespace taseplab

#endif
