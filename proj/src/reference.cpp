#include "taseplab/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "taseplab/errors.hpp"
#include "taseplab/renorm.hpp"

namespace taseplab {

void ReferenceParams::validate() const {
    if (!(rho_c >= 0.0 && rho_c <= 0.5)) throw validation_error("ReferenceParams.rho_c must lie in [0, 1/2]");
    if (!(J >= 0.0)) throw validation_error("ReferenceParams.J must be nonnegative");
}

double reference_flux(const ReferenceParams& p, double rho) {
    p.validate();
    if (p.rho_c == 0.0) return rho > 0.0 && rho < 1.0 ? p.J : 0.0; // degenerate ramp
    return p.J * std::min({rho / p.rho_c, (1.0 - rho) / p.rho_c, 1.0});
}

double reference_k(const ReferenceParams& p, double x) {
    p.validate();
    if (p.rho_c == 0.0) return x < 0.0 ? -x : 0.0;
    const double edge = p.J / p.rho_c;
    if (x < -edge) return -x;
    if (x < 0.0) return p.J - (1.0 - p.rho_c) * x;
    if (x < edge) return p.J - p.rho_c * x;
    return 0.0;
}

double reference_tau(const ReferenceParams& p, double x, double y) {
    p.validate();
    const double xp = std::max(x, 0.0), xm = -std::min(x, 0.0);
    if (!(y >= xm)) throw validation_error("reference_tau: y must be at least x^-");
    if (p.J == 0.0) throw validation_error("reference_tau: degenerate reference (J = 0)");
    return (p.rho_c * xp - (1.0 - p.rho_c) * xm + y) / p.J;
}

double reference_height(const ReferenceParams& p, double t, double x) {
    if (!(t > 0.0)) throw validation_error("reference_height: t must be positive");
    return t * reference_k(p, x / t);
}

namespace {

void require_strictly_increasing(const SampledCurve& c, const char* who) {
    if (c.xs.size() < 2 || c.xs.size() != c.vs.size())
        throw validation_error(std::string(who) + ": need at least two samples");
    for (std::size_t i = 1; i < c.xs.size(); ++i)
        if (!(c.xs[i] > c.xs[i - 1]))
            throw validation_error(std::string(who) + ": abscissas must strictly increase");
}

// lower convex hull of the sample points (monotone chain over sorted xs)
SampledCurve lower_hull(const SampledCurve& c) {
    SampledCurve hull;
    for (std::size_t i = 0; i < c.xs.size(); ++i) {
        while (hull.xs.size() >= 2) {
            const std::size_t m = hull.xs.size();
            const double cross = (hull.vs[m - 1] - hull.vs[m - 2]) * (c.xs[i] - hull.xs[m - 2]) -
                                 (c.vs[i] - hull.vs[m - 2]) * (hull.xs[m - 1] - hull.xs[m - 2]);
            if (cross >= 0.0) hull.xs.pop_back(), hull.vs.pop_back();
            else break;
        }
        hull.xs.push_back(c.xs[i]);
        hull.vs.push_back(c.vs[i]);
    }
    return hull;
}

void require_convex(const SampledCurve& c, const char* who, double tol = 1e-9) {
    double prev = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < c.xs.size(); ++i) {
        const double s = (c.vs[i] - c.vs[i - 1]) / (c.xs[i] - c.xs[i - 1]);
        if (s < prev - tol) throw validation_error(std::string(who) + ": input is not convex");
        prev = s;
    }
}

} // namespace

namespace {

// Abscissas for an exact conjugate: the caller's grid plus the kink
// positions the transform itself creates (one per hull slope). With those
// included, conjugating twice reproduces a piecewise-linear input exactly.
std::vector<double> conjugate_abscissas(const std::vector<double>& grid, const SampledCurve& hull,
                                        double slope_sign) {
    std::vector<double> xs = grid;
    for (std::size_t i = 1; i < hull.xs.size(); ++i) {
        const double s = (hull.vs[i] - hull.vs[i - 1]) / (hull.xs[i] - hull.xs[i - 1]);
        const double kink = slope_sign * s;
        if (kink > grid.front() && kink < grid.back()) xs.push_back(kink);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

} // namespace

SampledCurve legendre_flux_from_k(const SampledCurve& k, const std::vector<double>& rho_grid) {
    require_strictly_increasing(k, "legendre_flux_from_k");
    require_convex(k, "legendre_flux_from_k");
    if (rho_grid.size() < 2) throw validation_error("legendre_flux_from_k: need a grid");
    const SampledCurve hull = lower_hull(k);

    SampledCurve f;
    f.xs = conjugate_abscissas(rho_grid, hull, -1.0);
    f.vs.resize(f.xs.size());
    // as rho grows the minimizing knot moves left (slopes of k + rho cross zero)
    std::size_t at = hull.xs.size() - 1;
    for (std::size_t i = 0; i < f.xs.size(); ++i) {
        const double rho = f.xs[i];
        auto objective = [&](std::size_t idx) { return hull.vs[idx] + hull.xs[idx] * rho; };
        while (at > 0 && objective(at - 1) <= objective(at)) --at;
        while (at + 1 < hull.xs.size() && objective(at + 1) < objective(at)) ++at;
        f.vs[i] = objective(at);
    }
    return f;
}

SampledCurve legendre_k_from_flux(const SampledCurve& f, const std::vector<double>& v_grid) {
    require_strictly_increasing(f, "legendre_k_from_flux");
    if (v_grid.size() < 2) throw validation_error("legendre_k_from_flux: need a grid");
    // concave upper hull = negated lower hull of the negated values
    SampledCurve neg{f.xs, f.vs};
    for (double& v : neg.vs) v = -v;
    require_convex(neg, "legendre_k_from_flux (concavity)");
    SampledCurve hull = lower_hull(neg);
    for (double& v : hull.vs) v = -v;

    SampledCurve k;
    k.xs = conjugate_abscissas(v_grid, hull, 1.0);
    k.vs.resize(k.xs.size());
    std::size_t at = 0; // maximizer moves left as v grows; start from the right
    at = hull.xs.size() - 1;
    for (std::size_t i = 0; i < k.xs.size(); ++i) {
        const double v = k.xs[i];
        auto objective = [&](std::size_t idx) { return hull.vs[idx] - hull.xs[idx] * v; };
        while (at > 0 && objective(at - 1) >= objective(at)) --at;
        while (at + 1 < hull.xs.size() && objective(at + 1) > objective(at)) ++at;
        k.vs[i] = objective(at);
    }
    return k;
}

double eval_pl(const SampledCurve& curve, double x) {
    require_strictly_increasing(curve, "eval_pl");
    if (x <= curve.xs.front()) return curve.vs.front();
    if (x >= curve.xs.back()) return curve.vs.back();
    const auto it = std::upper_bound(curve.xs.begin(), curve.xs.end(), x);
    const std::size_t hi = static_cast<std::size_t>(it - curve.xs.begin());
    const double w = (x - curve.xs[hi - 1]) / (curve.xs[hi] - curve.xs[hi - 1]);
    return curve.vs[hi - 1] + w * (curve.vs[hi] - curve.vs[hi - 1]);
}

SampledCurve invert_monotone(const SampledCurve& curve, const std::vector<double>& grid, double clamp_lo) {
    require_strictly_increasing(curve, "invert_monotone");
    for (std::size_t i = 1; i < curve.vs.size(); ++i)
        if (!(curve.vs[i] > curve.vs[i - 1]))
            throw validation_error("invert_monotone: values must strictly increase");
    SampledCurve out;
    out.xs = grid;
    out.vs.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double level = grid[i];
        if (level <= curve.vs.front()) {
            // linear continuation of the first piece, clamped below
            const double s = (curve.xs[1] - curve.xs[0]) / (curve.vs[1] - curve.vs[0]);
            out.vs[i] = std::max(clamp_lo, curve.xs[0] + (level - curve.vs[0]) * s);
            continue;
        }
        if (level >= curve.vs.back()) {
            const std::size_t m = curve.vs.size();
            const double s = (curve.xs[m - 1] - curve.xs[m - 2]) / (curve.vs[m - 1] - curve.vs[m - 2]);
            out.vs[i] = curve.xs[m - 1] + (level - curve.vs[m - 1]) * s;
            continue;
        }
        const auto it = std::upper_bound(curve.vs.begin(), curve.vs.end(), level);
        const std::size_t hi = static_cast<std::size_t>(it - curve.vs.begin());
        const double w = (level - curve.vs[hi - 1]) / (curve.vs[hi] - curve.vs[hi - 1]);
        out.vs[i] = curve.xs[hi - 1] + w * (curve.xs[hi] - curve.xs[hi - 1]);
    }
    return out;
}

double DiluteTargets::f0(double rho) const { return std::min(rho * (1.0 - rho), r / 4.0); }

double DiluteTargets::tau0(double x, double y) const {
    const double xp = std::max(x, 0.0), xm = -std::min(x, 0.0);
    if (!(y >= xm)) throw validation_error("tau0: y must be at least x^-");
    const double locus = xp * y1_plus - xm * y1_minus;
    if (y <= locus) {
        const double root = std::sqrt(x + y) + std::sqrt(y);
        return root * root;
    }
    return (rho_c0 * xp - (1.0 - rho_c0) * xm + y) / (r / 4.0);
}

DiluteTargets dilute_targets(double r) {
    if (!(r > 0.0 && r < 1.0)) throw validation_error("dilute_targets: r must lie in (0,1)");
    DiluteTargets t;
    t.r = r;
    t.rho_c0 = rho_c_limit(r);
    t.flat_length = std::sqrt(1.0 - r);
    t.y1_plus = y1_limit(r, +1);
    t.y1_minus = y1_limit(r, -1);
    // continuity across the branch switch, probed on both sides of the wedge
    const ReferenceParams ref{t.rho_c0, r / 4.0};
    for (double x : {1.0, 0.5, 2.0, -1.0, -0.5, -2.0}) {
        const double locus = std::max(x, 0.0) * t.y1_plus + std::min(x, 0.0) * t.y1_minus;
        if (locus < -std::min(x, 0.0)) continue;
        const double root = std::sqrt(x + locus) + std::sqrt(locus);
        t.branch_mismatch = std::max(t.branch_mismatch, std::fabs(root * root - reference_tau(ref, x, locus)));
    }
    if (t.branch_mismatch > 1e-9)
        throw validation_error("dilute_targets: branch continuity defect above 1e-9");
    return t;
}

PlateauEstimate detect_flat_segment(const FluxCurveData& curve, double r, double band) {
    if (curve.rho.size() < 3) throw validation_error("detect_flat_segment: need at least three samples");
    if (!(curve.rho.front() <= 1e-9 && curve.rho.back() >= 1.0 - 1e-9))
        throw validation_error("detect_flat_segment: curve must cover [0,1]");
    std::vector<double> errs = curve.stderr_;
    if (!errs.empty()) {
        std::nth_element(errs.begin(), errs.begin() + static_cast<std::ptrdiff_t>(errs.size() / 2), errs.end());
        const double med = errs[errs.size() / 2];
        if (band < med)
            throw validation_error("detect_flat_segment: band below the median stderr (unidentifiable)");
    }

    double grid = 1.0;
    for (std::size_t i = 1; i < curve.rho.size(); ++i) grid = std::min(grid, curve.rho[i] - curve.rho[i - 1]);

    PlateauEstimate out;
    out.band = band;
    out.uncertainty = grid;
    const double target = r / 4.0;
    for (std::size_t i = 0; i < curve.rho.size(); ++i) {
        const double rho = curve.rho[i];
        if (rho > 0.5 + 1e-12) break;
        bool flat = true;
        for (std::size_t k = 0; k < curve.rho.size(); ++k) {
            if (curve.rho[k] < rho - 1e-12 || curve.rho[k] > 1.0 - rho + 1e-12) continue;
            if (std::fabs(curve.value[k] - target) > band) {
                flat = false;
                break;
            }
        }
        if (flat) {
            out.found = true;
            out.rho_hat = rho;
            return out;
        }
    }
    return out;
}

} // namespace taseplab
