#ifndef TASEPLAB_CURVES_HPP
#define TASEPLAB_CURVES_HPP

#include <functional>
#include <vector>

namespace taseplab {

// Concave function on a closed interval. Either a piecewise-linear
// interpolant over knots, or knots plus an exact evaluator (used for the
// closed-form level-1 envelope, whose derivative blows up at the left edge
// where interpolation cannot reach the required accuracy).
// Evaluation outside the domain is an error, never an extrapolation.
class ConcaveCurve {
public:
    using Fn = std::function<double(double)>;

    static ConcaveCurve from_knots(std::vector<double> ys, std::vector<double> vals);
    static ConcaveCurve analytic(Fn value, Fn right_derivative, double lo, double hi);

    double domain_lo() const { return lo_; }
    double domain_hi() const { return hi_; }

    double value(double y) const;
    double right_derivative(double y) const;

    // inf{ y : g'(y) <= slope }, clamped to the domain
    double slope_threshold(double slope) const;

    // max of value(y) - slope*y over [lo, hi] (intersected with the domain);
    // exact for piecewise-linear curves, bisection on the derivative for
    // analytic ones
    double max_minus_linear(double slope, double lo, double hi, double* argmax = nullptr) const;

    // throws validation_error when a slope increases by more than tol
    void validate_concave(double tol = 1e-9) const;

    bool is_analytic() const { return static_cast<bool>(exact_); }
    const std::vector<double>& knot_ys() const { return ys_; }
    const std::vector<double>& knot_vals() const { return vals_; }

private:
    double lo_ = 0.0, hi_ = 0.0;
    std::vector<double> ys_, vals_;
    Fn exact_, exact_deriv_;
};

} // namespace taseplab

#endif
