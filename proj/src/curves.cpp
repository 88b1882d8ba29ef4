#include "taseplab/curves.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "taseplab/errors.hpp"

namespace taseplab {

ConcaveCurve ConcaveCurve::from_knots(std::vector<double> ys, std::vector<double> vals) {
    if (ys.size() < 2 || ys.size() != vals.size())
        throw validation_error("ConcaveCurve: need at least two knots");
    for (std::size_t i = 1; i < ys.size(); ++i)
        if (!(ys[i] > ys[i - 1])) throw validation_error("ConcaveCurve: knots must strictly increase");
    ConcaveCurve c;
    c.lo_ = ys.front();
    c.hi_ = ys.back();
    c.ys_ = std::move(ys);
    c.vals_ = std::move(vals);
    return c;
}

ConcaveCurve ConcaveCurve::analytic(Fn value, Fn right_derivative, double lo, double hi) {
    if (!(hi > lo)) throw validation_error("ConcaveCurve: empty domain");
    ConcaveCurve c;
    c.lo_ = lo;
    c.hi_ = hi;
    c.exact_ = std::move(value);
    c.exact_deriv_ = std::move(right_derivative);
    return c;
}

namespace {
void check_domain(double y, double lo, double hi) {
    if (!(y >= lo - 1e-12 && y <= hi + 1e-12))
        throw validation_error("ConcaveCurve: evaluation outside domain");
}
} // namespace

double ConcaveCurve::value(double y) const {
    check_domain(y, lo_, hi_);
    y = std::clamp(y, lo_, hi_);
    if (exact_) return exact_(y);
    const auto it = std::upper_bound(ys_.begin(), ys_.end(), y);
    std::size_t k = static_cast<std::size_t>(it - ys_.begin());
    if (k == 0) return vals_.front();
    if (k == ys_.size()) return vals_.back();
    const double w = (y - ys_[k - 1]) / (ys_[k] - ys_[k - 1]);
    return vals_[k - 1] + w * (vals_[k] - vals_[k - 1]);
}

double ConcaveCurve::right_derivative(double y) const {
    check_domain(y, lo_, hi_);
    y = std::clamp(y, lo_, hi_);
    if (exact_) return exact_deriv_(y);
    // slope of the piece to the right of y
    auto it = std::upper_bound(ys_.begin(), ys_.end(), y);
    std::size_t k = static_cast<std::size_t>(it - ys_.begin());
    if (k >= ys_.size()) k = ys_.size() - 1; // right edge: reuse the last slope
    if (k == 0) k = 1;
    return (vals_[k] - vals_[k - 1]) / (ys_[k] - ys_[k - 1]);
}

double ConcaveCurve::slope_threshold(double slope) const {
    if (exact_) {
        if (exact_deriv_(lo_) <= slope) return lo_;
        if (exact_deriv_(hi_) > slope) return hi_;
        double a = lo_, b = hi_;
        for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::fabs(b)); ++it) {
            const double m = 0.5 * (a + b);
            (exact_deriv_(m) <= slope ? b : a) = m;
        }
        return 0.5 * (a + b);
    }
    for (std::size_t k = 1; k < ys_.size(); ++k) {
        const double s = (vals_[k] - vals_[k - 1]) / (ys_[k] - ys_[k - 1]);
        if (s <= slope) return ys_[k - 1];
    }
    return hi_;
}

double ConcaveCurve::max_minus_linear(double slope, double lo, double hi, double* argmax) const {
    lo = std::max(lo, lo_);
    hi = std::min(hi, hi_);
    if (!(hi >= lo)) throw validation_error("ConcaveCurve::max_minus_linear: empty interval");
    const double arg = std::clamp(slope_threshold(slope), lo, hi);
    if (argmax) *argmax = arg;
    return value(arg) - slope * arg;
}

void ConcaveCurve::validate_concave(double tol) const {
    if (exact_) return; // analytic curves are concave by construction
    // chord test: every knot must sit on or above the segment joining its
    // neighbours, up to rounding in the values themselves
    for (std::size_t k = 1; k + 1 < ys_.size(); ++k) {
        const double span = ys_[k + 1] - ys_[k - 1];
        const double chord =
            (vals_[k - 1] * (ys_[k + 1] - ys_[k]) + vals_[k + 1] * (ys_[k] - ys_[k - 1])) / span;
        const double scale = std::max({std::fabs(vals_[k - 1]), std::fabs(vals_[k]), std::fabs(vals_[k + 1]), 1.0});
        if (vals_[k] < chord - tol * scale)
            throw validation_error("ConcaveCurve: knot below its chord (not concave)");
    }
}

} // namespace taseplab
