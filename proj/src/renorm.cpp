#include "taseplab/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "taseplab/errors.hpp"

namespace taseplab {

namespace {
constexpr double kExactIntLimit = 9007199254740992.0; // 2^53

double sigma_minus(int sigma) { return sigma < 0 ? 1.0 : 0.0; }

// floor(K^gamma) with a guard against pow landing just below an integer
std::int64_t subblock_count(double K, double gamma) {
    auto l = static_cast<std::int64_t>(std::floor(std::pow(K, gamma)));
    if (std::log(static_cast<double>(l + 1)) <= gamma * std::log(K) + 1e-12) ++l;
    return std::max<std::int64_t>(l, 1);
}

double threshold_of(double K, const RenormParams& p) {
    return p.r / 4.0 + p.a / std::pow(K, p.b / 2.0);
}
} // namespace

void RenormParams::validate() const {
    if (!(r > 0.0 && r < 1.0)) throw validation_error("RenormParams.r must lie in (0,1)");
    if (!(a > 0.0)) throw validation_error("RenormParams.a must be positive");
    if (!(b >= 1.0 && b < 2.0)) throw validation_error("RenormParams.b must lie in [1,2)");
    if (!(beta > 0.0)) throw validation_error("RenormParams.beta must be positive");
    if (!(c > 0.0)) throw validation_error("RenormParams.c must be positive");
    if (!(C_fluct > 0.0)) throw validation_error("RenormParams.C_fluct must be positive");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw validation_error("RenormParams.epsilon must lie in [0,1]");
    const double cap = std::min(gamma0(), 2.0 / b - 1.0);
    if (!(gamma > 0.0 && gamma < cap))
        throw validation_error("RenormParams.gamma out of admissible range (0, min(beta/(beta+2), 2/b-1))");
    if (K1 < 2) throw validation_error("RenormParams.K1 must be at least 2");
}

LemmaConstants lemma_constants(const RenormParams& p) {
    LemmaConstants k;
    k.gamma0 = p.gamma0();
    const double denom = p.beta - p.gamma * (p.beta + 2.0);
    k.K_star_low = 2.0 + std::pow(4.0 * p.c, 1.0 / denom);
    k.K_star_eps = p.epsilon > 0.0 ? std::pow(2.0 * p.c / p.epsilon, 1.0 / (p.beta + 1.0))
                                   : std::numeric_limits<double>::infinity();
    k.eps0 = std::min({1.0, std::pow(2.0, -p.beta) * p.c,
                       2.0 * p.c / std::pow(3.0 + std::pow(4.0 * p.c, 1.0 / denom), p.beta + 1.0)});
    return k;
}

const ScaleRow& ScaleTable::at(int level) const {
    if (level < 1 || level > static_cast<int>(rows.size()))
        throw validation_error("ScaleTable: level out of range");
    return rows[static_cast<std::size_t>(level - 1)];
}

double ScaleTable::threshold(int level) const {
    if (level >= 1 && level <= static_cast<int>(rows.size())) return at(level).j;
    if (level == static_cast<int>(rows.size()) + 1) {
        const ScaleRow& last = rows.back();
        return threshold_of(last.K_approx * static_cast<double>(last.l), params);
    }
    throw validation_error("ScaleTable: threshold level out of range");
}

ScaleTable build_scales(const RenormParams& p, int n_max) {
    p.validate();
    if (n_max < 1) throw validation_error("build_scales: n_max must be >= 1");
    ScaleTable table;
    table.params = p;
    table.constants = lemma_constants(p);

    std::int64_t K = p.K1;
    double K_approx = static_cast<double>(p.K1);
    bool exact = true;
    for (int n = 1; n <= n_max; ++n) {
        ScaleRow row;
        row.level = n;
        row.K = exact ? K : 0;
        row.K_approx = K_approx;
        row.exact = exact;
        row.l = subblock_count(K_approx, p.gamma);
        row.j = threshold_of(K_approx, p);
        const double K_next = K_approx * static_cast<double>(row.l);
        row.delta = p.C_fluct * std::pow(std::log(K_next), 1.5) / std::sqrt(K_approx);
        row.zeta = p.c / std::pow(K_approx, p.beta);
        table.rows.push_back(row);

        if (exact) {
            if (static_cast<double>(K) * static_cast<double>(row.l) < kExactIntLimit) K *= row.l;
            else { exact = false; table.approximate = true; }
        }
        K_approx = K_next;
    }
    for (int n = 2; n <= n_max; ++n) {
        ScaleRow& row = table.rows[static_cast<std::size_t>(n - 1)];
        const ScaleRow& prev = table.rows[static_cast<std::size_t>(n - 2)];
        const double j_next = table.threshold(n + 1);
        row.t = (1.0 / j_next - 1.0 / row.j) / prev.delta;
    }
    return table;
}

double phi(int sigma, double y) {
    const double base = 0.5 * sigma + y;
    return std::sqrt(base) * std::pow(2.0 + std::log1p(y), 1.5);
}

double phi_prime(int sigma, double y) {
    const double base = 0.5 * sigma + y;
    const double u = 2.0 + std::log1p(y);
    return std::pow(u, 1.5) / (2.0 * std::sqrt(base)) + std::sqrt(base) * 1.5 * std::sqrt(u) / (1.0 + y);
}

double phi_prime_max(int sigma) { return phi_prime(sigma, sigma_minus(sigma)); }

double phi_prime_inverse(int sigma, double t) {
    const double lo0 = sigma_minus(sigma);
    if (!(t > 0.0)) throw regime_error("phi_prime_inverse: derivative target must be positive");
    if (t > phi_prime_max(sigma))
        throw regime_error("phi_prime_inverse: regime violated, target " + std::to_string(t) +
                           " above the derivative range");
    double lo = lo0, hi = std::max(1.0, 2.0 * lo0);
    while (phi_prime(sigma, hi) > t) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) throw regime_error("phi_prime_inverse: no solution below overflow");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + hi); ++it) {
        const double m = 0.5 * (lo + hi);
        (phi_prime(sigma, m) > t ? lo : hi) = m;
    }
    return 0.5 * (lo + hi);
}

ConcaveCurve g_initial(int sigma, double domain_hi) {
    const double lo = sigma_minus(sigma);
    const double s = sigma;
    auto value = [s](double y) {
        const double root = std::sqrt(s + y) + std::sqrt(y);
        return root * root;
    };
    auto deriv = [s](double y) {
        const double q = y * (s + y);
        if (q <= 0.0) return std::numeric_limits<double>::infinity();
        return 2.0 + (2.0 * y + s) / std::sqrt(q);
    };
    return ConcaveCurve::analytic(value, deriv, lo, domain_hi);
}

ConcaveCurve g_step(const ConcaveCurve& g, int sigma, double inv_l, double j_next, double delta,
                    double out_hi, int knot_count, const std::vector<double>& focus) {
    if (!(inv_l >= 0.0 && inv_l < 1.0)) throw validation_error("g_step: inv_l must lie in [0,1)");
    if (!(j_next > 0.0)) throw validation_error("g_step: threshold must be positive");
    const double lo = sigma_minus(sigma);
    if (std::fabs(g.domain_lo() - lo) > 1e-12) throw validation_error("g_step: input domain must start at sigma^-");
    if (out_hi > g.domain_hi() * (1.0 + 1e-12) + 1e-12)
        throw validation_error("g_step: output range exceeds the input curve domain");
    g.validate_concave(1e-9);

    const double slope = 1.0 / j_next;
    const double branch_y = (1.0 - inv_l) * g.slope_threshold(slope);

    std::vector<double> ys;
    ys.push_back(lo);
    const double range = out_hi - lo;
    // geometric ladder out of the left edge (square-root behaviour there)
    for (double off = range * 1e-9; off < range * 0.1; off *= 1.6) ys.push_back(lo + off);
    const int linear = std::max(knot_count / 2, 16);
    for (int i = 1; i <= linear; ++i)
        ys.push_back(lo + range * static_cast<double>(i) / static_cast<double>(linear));
    auto add_cluster = [&](double centre) {
        if (!(centre > lo && centre < out_hi)) return;
        for (double off : {-0.01, -0.003, -0.001, 0.0, 0.001, 0.003, 0.01})
            ys.push_back(std::clamp(centre * (1.0 + off), lo, out_hi));
    };
    add_cluster(branch_y);
    for (double f : focus) add_cluster(f);
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end(),
                         [](double a, double b) { return std::fabs(a - b) < 1e-14 * (1.0 + std::fabs(a)); }),
             ys.end());

    std::vector<double> vals(ys.size());
    const double boundary_term = 0.5 * (1.0 + sigma) * inv_l / j_next;
    for (std::size_t k = 0; k < ys.size(); ++k) {
        const double y = ys[k];
        const double sup = g.max_minus_linear(slope, lo, y / (1.0 - inv_l));
        vals[k] = (1.0 - inv_l) * sup + y * slope + boundary_term + delta * phi(sigma, y);
    }
    ConcaveCurve out = ConcaveCurve::from_knots(std::move(ys), std::move(vals));
    out.validate_concave(1e-12);
    return out;
}

double g_step_branch_value(const ConcaveCurve& g, int sigma, double inv_l, double j_next, double delta,
                           double y) {
    const double lo = sigma_minus(sigma);
    const double slope = 1.0 / j_next;
    const double y_thr = g.slope_threshold(slope);
    const double boundary_term = 0.5 * (1.0 + sigma) * inv_l / j_next;
    double sup;
    if (y >= (1.0 - inv_l) * y_thr) {
        sup = g.value(y_thr) - slope * y_thr; // interior optimum
    } else {
        const double edge = std::max(lo, y / (1.0 - inv_l));
        sup = g.value(edge) - slope * edge; // constrained by the interval edge
    }
    return (1.0 - inv_l) * sup + y * slope + boundary_term + delta * phi(sigma, y);
}

double rho_c_limit(double r) { return 0.5 * (1.0 - std::sqrt(1.0 - r)); }

double y1_limit(double r, int sigma) {
    const double rho = rho_c_limit(r);
    const double num = sigma > 0 ? rho * rho : (1.0 - rho) * (1.0 - rho);
    return num / (1.0 - 2.0 * rho);
}

double solve_y_n(const ScaleTable& scales, int level, int sigma) {
    if (level < 1) throw validation_error("solve_y_n: level must be >= 1");
    if (level == 1) {
        const double j2 = scales.threshold(2);
        if (!(j2 < 0.25)) throw regime_error("solve_y_n: level-1 threshold at or above 1/4");
        const double rho = 0.5 * (1.0 - std::sqrt(1.0 - 4.0 * j2));
        const double num = sigma > 0 ? rho * rho : (1.0 - rho) * (1.0 - rho);
        return num / (1.0 - 2.0 * rho);
    }
    return phi_prime_inverse(sigma, scales.at(level).t);
}

namespace {

struct SigmaTrack {
    std::vector<double> rho;   // rho_n^sigma, levels 1..n_curves
    std::vector<double> y_arg; // in-domain maximizers
    std::vector<double> delta_n;
    ConcaveCurve last_curve;
};

// Every envelope lives on the reporting window [sigma^-, y_cap]; the
// supremum windows inside the recursion are clipped by that domain (the
// curves are never extrapolated), which keeps the level-to-level
// inequalities exactly self-consistent.
SigmaTrack run_sigma(const ScaleTable& scales, int sigma, int n_curves, double y_cap) {
    const double lo = sigma_minus(sigma);
    const int n_max = n_curves;

    SigmaTrack track;
    ConcaveCurve g = g_initial(sigma, y_cap);
    for (int n = 1; n <= n_max; ++n) {
        const double j_next = scales.threshold(n + 1);
        double arg = lo;
        const double sup = g.max_minus_linear(1.0 / j_next, lo, y_cap, &arg);
        track.rho.push_back(j_next * sup + lo);
        track.y_arg.push_back(arg);
        if (n == n_max) break;
        const ScaleRow& row = scales.at(n);
        std::vector<double> focus = {arg};
        if (row.t > 0.0 && n + 1 <= n_max) {
            const double t_next = scales.at(n + 1).t;
            if (t_next > 0.0 && t_next <= phi_prime_max(sigma)) focus.push_back(phi_prime_inverse(sigma, t_next));
        }
        g = g_step(g, sigma, 1.0 / static_cast<double>(row.l), j_next, row.delta, y_cap, 600, focus);
    }
    // delta_n uses the next level's in-domain maximizer
    for (int n = 1; n < n_max; ++n)
        track.delta_n.push_back(scales.threshold(n + 1) * scales.at(n).delta *
                                phi(sigma, track.y_arg[static_cast<std::size_t>(n)]));
    track.last_curve = g;
    return track;
}

} // namespace

SequenceReport rho_J_sequences(const RenormParams& p, int n_max, double y_cap_factor) {
    if (n_max < 1) throw validation_error("rho_J_sequences: n_max must be >= 1");
    SequenceReport report;
    report.scales = build_scales(p, n_max + 2);
    for (int n = 1; n <= n_max + 1; ++n)
        if (report.scales.at(n).l < 2)
            throw regime_error("rho_J_sequences: subblock count below 2 at level " + std::to_string(n));

    report.y_cap = std::max(y_cap_factor * y1_limit(p.r, -1), 2.0);
    const int n_curves = n_max + 1;
    const SigmaTrack plus = run_sigma(report.scales, +1, n_curves, report.y_cap);
    const SigmaTrack minus = run_sigma(report.scales, -1, n_curves, report.y_cap);

    double prod_a = 1.0, sum_delta_p = 0.0, sum_delta_m = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        const auto idx = static_cast<std::size_t>(n - 1);
        SequenceRow row;
        row.level = n;
        row.J = report.scales.threshold(n + 1);
        row.y_curve_plus = plus.y_arg[idx];
        row.y_curve_minus = minus.y_arg[idx];
        const double nan = std::numeric_limits<double>::quiet_NaN();
        bool analytic_ok = true;
        try {
            row.y_analytic_plus = solve_y_n(report.scales, n, +1);
        } catch (const regime_error&) { row.y_analytic_plus = nan; analytic_ok = false; }
        try {
            row.y_analytic_minus = solve_y_n(report.scales, n, -1);
        } catch (const regime_error&) { row.y_analytic_minus = nan; analytic_ok = false; }
        row.rho_plus = plus.rho[idx];
        row.rho_minus = minus.rho[idx];
        row.rho = std::max(row.rho_plus, row.rho_minus);
        row.delta_n = plus.delta_n[idx];

        const ScaleRow& sc = report.scales.at(n);
        const double gap = 1.0 / report.scales.threshold(n + 2) - 1.0 / report.scales.threshold(n + 1);
        const double logterm = std::fabs(std::log(sc.delta / gap));
        row.delta_bound = row.J * sc.delta * sc.delta / (2.0 * gap) * logterm * logterm * logterm;

        const double inv_l = 1.0 / static_cast<double>(sc.l);
        const double ratio = report.scales.threshold(n + 2) / row.J;
        row.recursion_ok_plus =
            plus.rho[idx + 1] <= ratio * ((1.0 - inv_l) * row.rho_plus + inv_l + plus.delta_n[idx]) + 1e-9;
        row.recursion_ok_minus =
            minus.rho[idx + 1] <=
            ratio * ((1.0 - inv_l) * row.rho_minus + inv_l + minus.delta_n[idx] + (1.0 / ratio - 1.0)) + 1e-9;

        row.induction_ok = row.rho_plus <= plus.rho[0] * prod_a + (1.0 - prod_a) + sum_delta_p + 1e-9 &&
                           row.rho_minus <= minus.rho[0] * prod_a + (1.0 - prod_a) + sum_delta_m + 1e-9;
        row.in_regime = analytic_ok && row.rho >= 0.0 && row.rho <= 1.0;
        report.rows.push_back(row);

        prod_a *= 1.0 - inv_l;
        sum_delta_p += plus.delta_n[idx];
        sum_delta_m += minus.delta_n[idx];
    }
    report.fitted_delta_constant = 0.0;
    for (const auto& row : report.rows)
        if (row.delta_bound > 0.0)
            report.fitted_delta_constant = std::max(report.fitted_delta_constant, row.delta_n / row.delta_bound);
    report.g_final_plus = plus.last_curve;
    report.g_final_minus = minus.last_curve;
    return report;
}

std::vector<DiluteRow> dilute_scan(const RenormParams& params_template, const std::vector<double>& eps_list,
                                   int n_max, double y_eval_frac) {
    std::vector<DiluteRow> out;
    for (double eps : eps_list) {
        if (!(eps > 0.0 && eps <= 1.0)) throw validation_error("dilute_scan: epsilon must lie in (0,1]");
        RenormParams p = params_template;
        p.epsilon = eps;
        const double K_star = std::pow(2.0 * p.c / eps, 1.0 / (p.beta + 1.0));
        if (K_star > 4e15) throw validation_error("dilute_scan: epsilon too small for an exact block length");
        p.K1 = std::max<std::int64_t>(2, static_cast<std::int64_t>(std::floor(K_star)));

        const SequenceReport seq = rho_J_sequences(p, n_max);
        DiluteRow row;
        row.epsilon = eps;
        row.K1 = p.K1;
        row.flagged = eps > seq.scales.constants.eps0;
        row.rho1 = seq.rows.front().rho_plus;
        const int burn_in = std::min(3, n_max - 1);
        row.rho_limit = 0.0;
        for (const auto& r : seq.rows)
            if (r.level > burn_in) row.rho_limit = std::max(row.rho_limit, r.rho);
        row.J_last = seq.rows.back().J;
        row.y1_plus = y1_limit(p.r, +1);
        row.y1_minus = y1_limit(p.r, -1);
        row.product_defect = 1.0;
        for (int n = 1; n <= n_max; ++n) {
            const double l = static_cast<double>(seq.scales.at(n).l);
            row.product_defect *= l / (l - 1.0);
        }
        row.y_eval = y_eval_frac * row.y1_plus;
        // deepest envelope against the level-1 closed form
        const ConcaveCurve g1 = g_initial(+1, row.y_eval + 1.0);
        row.g_defect = seq.g_final_plus.value(row.y_eval) - g1.value(row.y_eval);
        out.push_back(row);
    }
    return out;
}

} // namespace taseplab
