#ifndef TASEPLAB_DISORDER_HPP
#define TASEPLAB_DISORDER_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace taseplab {

// Law of one site's jump rate: rate 1 with probability 1-epsilon, otherwise
// a draw from Q supported on [r, R].
enum class QKind { point_mass_at_r, uniform_on_r_R, power_tail };

struct DisorderSpec {
    double r = 0.5;       // lower edge of the defect support, in (0,1)
    double R = 0.5;       // upper edge, r <= R < 1
    double epsilon = 0.0; // defect density
    QKind q_kind = QKind::point_mass_at_r;
    double kappa = 2.0;   // power_tail exponent, > 1
    std::uint64_t seed = 0;

    void validate() const; // throws validation_error naming the offending field

    // Rate at site x. Pure in (seed, x); O(1); no storage.
    double rate(std::int64_t x) const;

    // True when Q is known to satisfy the power-tail condition behind the
    // current-decay assumption. uniform_on_r_R is kappa = 1, which is outside
    // the admissible range, so it is flagged unverified.
    bool tail_assumption_verified() const { return q_kind != QKind::uniform_on_r_R; }

    std::string to_json() const;
    static DisorderSpec from_json(const std::string& text); // unknown keys rejected
};

struct Interval {
    std::int64_t lo = 0; // inclusive
    std::int64_t hi = 0; // inclusive
    std::int64_t length() const { return hi - lo + 1; }
    bool contains(std::int64_t x) const { return lo <= x && x <= hi; }
};

// Materialized window of quenched rates.
struct Environment {
    Interval window;
    std::vector<double> rates; // rates[x - window.lo]

    double rate(std::int64_t x) const { return rates[static_cast<std::size_t>(x - window.lo)]; }
    double min_rate() const;
};

Environment sample_environment(const DisorderSpec& spec, Interval window);

// Environment with every rate given explicitly (tests, couplings).
Environment make_environment(Interval window, std::vector<double> rates);

const char* q_kind_name(QKind k);

} // namespace taseplab

#endif
