#ifndef TASEPLAB_TESTS_HELPERS_HPP
#define TASEPLAB_TESTS_HELPERS_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "taseplab/disorder.hpp"
#include "taseplab/lpp.hpp"

// Brute-force oracles, independent of the production DP path.

namespace taseplab::test {

// Exhaustive path enumeration with compensated summation: max over all
// admissible step sequences of the summed cell weights.
inline double enumerate_passage(const std::function<double(std::int64_t)>& alpha,
                                const std::function<double(std::int64_t, std::int64_t)>& service,
                                Point from, Point to, std::optional<Interval> box = std::nullopt) {
    if (!wedge_reachable(from, to)) return -1.0;
    double best = -1.0;
    std::function<void(Point, double, double)> walk = [&](Point p, double acc, double comp) {
        // Kahan step
        const double w = service(p.x, p.y) / alpha(p.x);
        const double t = acc + (w - comp);
        comp = (t - acc) - (w - comp);
        acc = t;
        if (p.x == to.x && p.y == to.y) {
            best = std::max(best, acc);
            return;
        }
        const Point right{p.x + 1, p.y}, up{p.x - 1, p.y + 1};
        if (wedge_reachable(right, to) && (!box || box->contains(right.x))) walk(right, acc, comp);
        if (up.y <= to.y && wedge_reachable(up, to) && (!box || box->contains(up.x))) walk(up, acc, comp);
    };
    walk(from, 0.0, 0.0);
    return best;
}

inline double mean(const std::vector<double>& xs) {
    double m = 0.0;
    for (double x : xs) m += x;
    return m / static_cast<double>(xs.size());
}

inline double stderr_of_mean(const std::vector<double>& xs) {
    const double m = mean(xs);
    double var = 0.0;
    for (double x : xs) var += (x - m) * (x - m);
    return std::sqrt(var / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
}

} // namespace taseplab::test

#endif
