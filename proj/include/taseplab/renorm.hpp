#ifndef TASEPLAB_RENORM_HPP
#define TASEPLAB_RENORM_HPP

#include <cstdint>
#include <vector>

#include "taseplab/curves.hpp"

namespace taseplab {

struct RenormParams {
    double r = 0.5;
    double a = 1.0;
    double b = 1.0;       // current-decay exponent, in [1,2)
    double beta = 1.0;    // failure-probability exponent
    double c = 1.0;
    double gamma = 0.1;   // block-growth exponent, in (0, min(beta/(beta+2), 2/b-1))
    double C_fluct = 1.0; // constant inside the fluctuation width
    double epsilon = 0.0;
    std::int64_t K1 = 10000;

    double gamma0() const { return beta / (beta + 2.0); }
    void validate() const;
};

struct LemmaConstants {
    double K_star_eps = 0.0; // upper end of the admissible K1 interval, (2c/eps)^{1/(beta+1)}
    double K_star_low = 0.0; // lower end, 2 + (4c)^{1/(beta - gamma(beta+2))}
    double gamma0 = 0.0;
    double eps0 = 0.0;
};

LemmaConstants lemma_constants(const RenormParams& p);

struct ScaleRow {
    int level = 0;
    std::int64_t K = 0;     // block length (exact while it fits in 2^53)
    double K_approx = 0.0;  // always valid
    bool exact = true;
    std::int64_t l = 0;     // subblock count of the NEXT level, floor(K^gamma)
    double j = 0.0;         // current threshold r/4 + a/K^{b/2}
    double delta = 0.0;     // fluctuation width C (log K_{next})^{3/2} / sqrt(K)
    double zeta = 0.0;      // failure bound c/K^beta
    double t = 0.0;         // derivative target (j_{n+1}^{-1} - j_n^{-1})/delta_{n-1}; level >= 2
};

struct ScaleTable {
    RenormParams params;
    std::vector<ScaleRow> rows;
    LemmaConstants constants;
    bool approximate = false; // some K exceeded 2^53

    const ScaleRow& at(int level) const;
    // threshold j_level for any level <= n_max+1 (computed from the last row when needed)
    double threshold(int level) const;
};

ScaleTable build_scales(const RenormParams& p, int n_max);

// sqrt(sigma/2 + y) * (2 + log(1+y))^{3/2} and friends, on y >= sigma^-
double phi(int sigma, double y);
double phi_prime(int sigma, double y);
double phi_prime_max(int sigma); // value at the left edge of the domain
// solves phi'(y) = t; throws regime_error when t is above the range
double phi_prime_inverse(int sigma, double t);

// level-1 crossing envelope (sqrt(sigma+y) + sqrt(y))^2 as an exact curve
ConcaveCurve g_initial(int sigma, double domain_hi);

// One renormalization step of the crossing envelope:
//   g_next(y) = sup_{sigma^- <= u <= y/(1-inv_l)} (1-inv_l)[g(u) - u/j_next]
//             + y/j_next + (1+sigma)/2 * inv_l/j_next + delta*phi(y).
// The output is a knot curve on [sigma^-, out_hi]; g must extend to
// out_hi/(1-inv_l).
ConcaveCurve g_step(const ConcaveCurve& g, int sigma, double inv_l, double j_next, double delta,
                    double out_hi, int knot_count = 600, const std::vector<double>& focus = {});

// Closed-form branch value of the same step (the sup collapses to either the
// slope threshold or the interval edge); used to cross-check g_step.
double g_step_branch_value(const ConcaveCurve& g, int sigma, double inv_l, double j_next, double delta,
                           double y);

// Analytic derivative-equation solution phi'(y_n) = t_n; defined for
// level >= 2. Level 1 returns the closed-form maximizer of the level-1
// envelope under threshold j_2.
double solve_y_n(const ScaleTable& scales, int level, int sigma);

// limiting objects of the vanishing-dilution regime
double rho_c_limit(double r);                      // (1 - sqrt(1-r))/2
double y1_limit(double r, int sigma);              // rho^2/(1-2rho) resp. (1-rho)^2/(1-2rho)

struct SequenceRow {
    int level = 0;
    double J = 0.0;           // j_{level+1}
    double y_curve_plus = 0.0, y_curve_minus = 0.0;       // in-domain maximizers
    double y_analytic_plus = 0.0, y_analytic_minus = 0.0; // NaN when the regime is violated
    double rho_plus = 0.0, rho_minus = 0.0, rho = 0.0;
    double delta_n = 0.0;      // J * delta * phi(+1, y_{next}); in-domain
    double delta_bound = 0.0;  // bound shape with unit constant
    bool recursion_ok_plus = false, recursion_ok_minus = false;
    bool induction_ok = false;
    bool in_regime = false;    // rho in [0,1] and the analytic equation solvable
};

struct SequenceReport {
    ScaleTable scales;
    std::vector<SequenceRow> rows;
    double y_cap = 0.0;                 // curve domain bound used for the maximizations
    double fitted_delta_constant = 0.0; // max over levels of delta_n / delta_bound
    ConcaveCurve g_final_plus, g_final_minus; // deepest computed envelopes
};

SequenceReport rho_J_sequences(const RenormParams& p, int n_max, double y_cap_factor = 10.0);

struct DiluteRow {
    double epsilon = 0.0;
    std::int64_t K1 = 0;
    bool flagged = false; // epsilon above the admissible bound (still computed)
    double rho1 = 0.0;
    double rho_limit = 0.0; // max of rho_n past the burn-in level
    double J_last = 0.0;
    double y1_plus = 0.0, y1_minus = 0.0; // dilute-limit maximizer targets
    double product_defect = 0.0;          // prod l_n/(l_n-1) over computed levels
    double y_eval = 0.0;
    double g_defect = 0.0;                // g_{n_max}(+1, y_eval) - g_1(+1, y_eval)
};

std::vector<DiluteRow> dilute_scan(const RenormParams& params_template, const std::vector<double>& eps_list,
                                   int n_max, double y_eval_frac = 0.5);

} // namespace taseplab

#endif
