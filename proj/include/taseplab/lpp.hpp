#ifndef TASEPLAB_LPP_HPP
#define TASEPLAB_LPP_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "taseplab/disorder.hpp"
#include "taseplab/errors.hpp"
#include "taseplab/rng.hpp"

// Wedge last-passage percolation with columnar rates: path steps (1,0) and
// (-1,1), cell weight Y(i,j)/alpha(i). Kernels are templated on the rate and
// service sources; the serial row sweep is the reference implementation and
// the diagonal wavefront is the OpenMP kernel (bit-identical results).

namespace taseplab {

struct Point {
    std::int64_t x = 0;
    std::int64_t y = 0;
};

// deterministic Exp(1) field over (i,j)
struct ServiceField {
    std::uint64_t seed = 0;
    double operator()(std::int64_t i, std::int64_t j) const {
        return exp_from_bits(mix3(seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)));
    }
};

inline bool wedge_reachable(Point from, Point to) {
    return to.y >= from.y && to.x + to.y >= from.x + from.y;
}

enum class DpKernel { serial_reference, wavefront, automatic };

namespace lpp_detail {

constexpr double kMinusInf = -std::numeric_limits<double>::infinity();

struct Ranges {
    Point from, to;
    std::int64_t box_lo, box_hi;
    bool boxed;

    std::int64_t row_lo(std::int64_t j) const {
        const std::int64_t lo = from.x - (j - from.y);
        return boxed && box_lo > lo ? box_lo : lo;
    }
    std::int64_t row_hi(std::int64_t j) const {
        const std::int64_t hi = to.x + (to.y - j);
        return boxed && box_hi < hi ? box_hi : hi;
    }
    std::size_t cells() const {
        std::size_t total = 0;
        for (std::int64_t j = from.y; j <= to.y; ++j)
            total += static_cast<std::size_t>(row_hi(j) - row_lo(j) + 1);
        return total;
    }
};

inline Ranges make_ranges(Point from, Point to, const Interval* box) {
    if (!wedge_reachable(from, to)) throw validation_error("passage time: empty path set");
    if (box) {
        if (!box->contains(from.x) || !box->contains(to.x))
            throw validation_error("passage time: endpoint outside the restricting box");
        return Ranges{from, to, box->lo, box->hi, true};
    }
    return Ranges{from, to, 0, 0, false};
}

// column-cached inverse rates over everything the path can touch
template <typename RateF>
std::vector<double> cache_inverse_rates(RateF&& alpha, const Ranges& rg, std::int64_t& col0) {
    std::int64_t lo = rg.row_lo(rg.to.y), hi = rg.row_hi(rg.from.y);
    for (std::int64_t j = rg.from.y; j <= rg.to.y; ++j) {
        lo = std::min(lo, rg.row_lo(j));
        hi = std::max(hi, rg.row_hi(j));
    }
    col0 = lo;
    std::vector<double> inv(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t i = lo; i <= hi; ++i) {
        const double a = alpha(i);
        if (!(a > 0.0)) throw validation_error("passage time: nonpositive rate in path range");
        inv[static_cast<std::size_t>(i - lo)] = 1.0 / a;
    }
    return inv;
}

template <typename RateF, typename ServiceF>
double row_sweep(RateF&& alpha, ServiceF&& service, const Ranges& rg) {
    std::int64_t col0 = 0;
    const std::vector<double> inv = cache_inverse_rates(alpha, rg, col0);

    std::vector<double> prev, cur;
    std::int64_t prev_lo = 0, prev_hi = -1;
    for (std::int64_t j = rg.from.y; j <= rg.to.y; ++j) {
        const std::int64_t lo = rg.row_lo(j), hi = rg.row_hi(j);
        cur.assign(static_cast<std::size_t>(hi - lo + 1), kMinusInf);
        for (std::int64_t i = lo; i <= hi; ++i) {
            double best = kMinusInf;
            if (i > lo) best = cur[static_cast<std::size_t>(i - 1 - lo)];
            if (i + 1 >= prev_lo && i + 1 <= prev_hi) {
                const double up = prev[static_cast<std::size_t>(i + 1 - prev_lo)];
                if (up > best) best = up;
            }
            if (i == rg.from.x && j == rg.from.y) best = 0.0;
            if (best == kMinusInf) continue; // not reachable from the origin
            cur[static_cast<std::size_t>(i - lo)] =
                service(i, j) * inv[static_cast<std::size_t>(i - col0)] + best;
        }
        prev.swap(cur);
        prev_lo = lo;
        prev_hi = hi;
    }
    return prev[static_cast<std::size_t>(rg.to.x - prev_lo)];
}

inline std::int64_t floor_div2(std::int64_t a) { return a >= 0 ? a / 2 : -((-a + 1) / 2); }
inline std::int64_t ceil_div2(std::int64_t a) { return a >= 0 ? (a + 1) / 2 : -((-a) / 2); }

// anti-diagonal d = i + 2j: both predecessors of a cell live on d-1
template <typename RateF, typename ServiceF>
double wavefront_sweep(RateF&& alpha, ServiceF&& service, const Ranges& rg) {
    std::int64_t col0 = 0;
    const std::vector<double> inv = cache_inverse_rates(alpha, rg, col0);

    const std::int64_t rows = rg.to.y - rg.from.y + 1;
    std::vector<double> prev(static_cast<std::size_t>(rows), kMinusInf);
    std::vector<double> cur(static_cast<std::size_t>(rows), kMinusInf);
    std::int64_t prev_jlo = 0, prev_jhi = -1;

    const std::int64_t d0 = rg.from.x + 2 * rg.from.y, d1 = rg.to.x + 2 * rg.to.y;
    for (std::int64_t d = d0; d <= d1; ++d) {
        std::int64_t jlo = std::max(rg.from.y, d - (rg.to.x + rg.to.y));
        std::int64_t jhi = std::min(rg.to.y, d - (rg.from.x + rg.from.y));
        if (rg.boxed) {
            jlo = std::max(jlo, ceil_div2(d - rg.box_hi));
            jhi = std::min(jhi, floor_div2(d - rg.box_lo));
        }
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (jhi - jlo > 2048)
#endif
        for (std::int64_t j = jlo; j <= jhi; ++j) {
            const std::int64_t i = d - 2 * j;
            double best = kMinusInf;
            if (j >= prev_jlo && j <= prev_jhi) best = prev[static_cast<std::size_t>(j - rg.from.y)];
            if (j - 1 >= prev_jlo && j - 1 <= prev_jhi) {
                const double up = prev[static_cast<std::size_t>(j - 1 - rg.from.y)];
                if (up > best) best = up;
            }
            if (i == rg.from.x && j == rg.from.y) best = 0.0;
            cur[static_cast<std::size_t>(j - rg.from.y)] =
                best == kMinusInf ? kMinusInf
                                  : service(i, j) * inv[static_cast<std::size_t>(i - col0)] + best;
        }
        prev.swap(cur);
        prev_jlo = jlo;
        prev_jhi = jhi;
    }
    return prev[static_cast<std::size_t>(rg.to.y - rg.from.y)];
}

} // namespace lpp_detail

// Last passage time over unrestricted wedge paths.
template <typename RateF, typename ServiceF>
double passage_time(RateF&& alpha, ServiceF&& service, Point from, Point to,
                    DpKernel kernel = DpKernel::automatic, std::size_t cell_budget = std::size_t{1} << 34) {
    const auto rg = lpp_detail::make_ranges(from, to, nullptr);
    if (rg.cells() > cell_budget) throw budget_error("passage_time: grid cell budget exceeded");
    if (kernel == DpKernel::automatic)
        kernel = rg.cells() > (std::size_t{1} << 22) ? DpKernel::wavefront : DpKernel::serial_reference;
    return kernel == DpKernel::wavefront ? lpp_detail::wavefront_sweep(alpha, service, rg)
                                         : lpp_detail::row_sweep(alpha, service, rg);
}

// Same with paths confined to the columns of box.
template <typename RateF, typename ServiceF>
double restricted_passage_time(RateF&& alpha, ServiceF&& service, Interval box, Point from, Point to,
                               DpKernel kernel = DpKernel::automatic,
                               std::size_t cell_budget = std::size_t{1} << 34) {
    const auto rg = lpp_detail::make_ranges(from, to, &box);
    if (rg.cells() > cell_budget) throw budget_error("restricted_passage_time: grid cell budget exceeded");
    if (kernel == DpKernel::automatic)
        kernel = rg.cells() > (std::size_t{1} << 22) ? DpKernel::wavefront : DpKernel::serial_reference;
    return kernel == DpKernel::wavefront ? lpp_detail::wavefront_sweep(alpha, service, rg)
                                         : lpp_detail::row_sweep(alpha, service, rg);
}

// Materialized table for small instances: cell inspection, path
// reconstruction, particle readouts.
class PassageGrid {
public:
    Point from, to;
    bool boxed = false;
    Interval box;

    double at(std::int64_t i, std::int64_t j) const {
        if (j < from.y || j > to.y) return lpp_detail::kMinusInf;
        const auto& row = rows_[static_cast<std::size_t>(j - from.y)];
        if (i < row.lo || i > row.hi) return lpp_detail::kMinusInf;
        return row.vals[static_cast<std::size_t>(i - row.lo)];
    }
    double result() const { return at(to.x, to.y); }
    std::int64_t row_lo(std::int64_t j) const { return rows_[static_cast<std::size_t>(j - from.y)].lo; }
    std::int64_t row_hi(std::int64_t j) const { return rows_[static_cast<std::size_t>(j - from.y)].hi; }

    // backtrack breaking ties toward the horizontal predecessor
    std::vector<Point> optimal_path() const;

    struct Row {
        std::int64_t lo, hi;
        std::vector<double> vals;
    };
    std::vector<Row> rows_;
};

template <typename RateF, typename ServiceF>
PassageGrid passage_grid(RateF&& alpha, ServiceF&& service, Point from, Point to,
                         const Interval* box = nullptr, std::size_t cell_budget = std::size_t{1} << 27) {
    const auto rg = lpp_detail::make_ranges(from, to, box);
    if (rg.cells() > cell_budget) throw budget_error("passage_grid: grid cell budget exceeded");
    PassageGrid grid;
    grid.from = from;
    grid.to = to;
    grid.boxed = box != nullptr;
    if (box) grid.box = *box;
    std::int64_t col0 = 0;
    const std::vector<double> inv = lpp_detail::cache_inverse_rates(alpha, rg, col0);
    for (std::int64_t j = from.y; j <= to.y; ++j) {
        PassageGrid::Row row;
        row.lo = rg.row_lo(j);
        row.hi = rg.row_hi(j);
        row.vals.assign(static_cast<std::size_t>(row.hi - row.lo + 1), lpp_detail::kMinusInf);
        for (std::int64_t i = row.lo; i <= row.hi; ++i) {
            double best = i > row.lo ? row.vals[static_cast<std::size_t>(i - 1 - row.lo)]
                                     : lpp_detail::kMinusInf;
            const double up = grid.at(i + 1, j - 1);
            if (up > best) best = up;
            if (i == from.x && j == from.y) best = 0.0;
            if (best == lpp_detail::kMinusInf) continue;
            row.vals[static_cast<std::size_t>(i - row.lo)] =
                service(i, j) * inv[static_cast<std::size_t>(i - col0)] + best;
        }
        grid.rows_.push_back(std::move(row));
    }
    return grid;
}

// Every cell that lies on at least one admissible path.
std::vector<Point> reachable_cells(Point from, Point to, const Interval* box = nullptr);

// ---------------------------------------------------------------------------
// Open-boundary passage table driven by a labeled initial condition: particle
// labels j with non-increasing starting positions sigma0(j) in
// [box.lo, box.hi+1]; T(i,j) is the time label j moves past column i. Cells
// left of sigma0(j) carry T = 0.
// ---------------------------------------------------------------------------

class OpenPassageTable {
public:
    Interval box;
    std::int64_t label_lo = 0, label_hi = -1;

    double at(std::int64_t i, std::int64_t j) const {
        if (!box.contains(i)) throw validation_error("OpenPassageTable::at: column outside box");
        if (j < label_lo || j > label_hi) throw validation_error("OpenPassageTable::at: unknown label");
        return rows_[static_cast<std::size_t>(j - label_lo)][static_cast<std::size_t>(i - box.lo)];
    }
    // position of particle j at time t: first column whose crossing is still pending
    std::int64_t position(std::int64_t j, double t) const {
        for (std::int64_t i = box.lo; i <= box.hi; ++i)
            if (at(i, j) > t) return i;
        return box.hi + 1;
    }

    std::vector<std::vector<double>> rows_;
};

template <typename RateF, typename ServiceF, typename Sigma0F>
OpenPassageTable open_lpp_passage(RateF&& alpha, ServiceF&& service, Interval box, Sigma0F&& sigma0,
                                  std::int64_t label_lo, std::int64_t label_hi) {
    if (box.length() < 2) throw validation_error("open_lpp_passage: box must hold at least two columns");
    if (label_hi < label_lo) throw validation_error("open_lpp_passage: empty label range");
    for (std::int64_t j = label_lo - 1; j <= label_hi; ++j) {
        const std::int64_t pos = sigma0(j);
        if (pos < box.lo || pos > box.hi + 1)
            throw validation_error("open_lpp_passage: sigma0 outside [box.lo, box.hi+1]");
        if (j > label_lo - 1 && pos > sigma0(j - 1))
            throw validation_error("open_lpp_passage: sigma0 must be non-increasing");
    }
    if (sigma0(label_lo - 1) != box.hi + 1)
        throw validation_error("open_lpp_passage: labels below label_lo must start at box.hi+1");

    OpenPassageTable table;
    table.box = box;
    table.label_lo = label_lo;
    table.label_hi = label_hi;
    const auto width = static_cast<std::size_t>(box.length());
    std::vector<double> prev(width, 0.0); // implicit all-zero row below label_lo
    for (std::int64_t j = label_lo; j <= label_hi; ++j) {
        std::vector<double> row(width, 0.0);
        const std::int64_t start = sigma0(j);
        for (std::int64_t i = start; i <= box.hi; ++i) {
            const double w = service(i, j) / alpha(i);
            double best;
            if (i == box.lo) best = prev[static_cast<std::size_t>(i + 1 - box.lo)];
            else if (i == box.hi) best = row[static_cast<std::size_t>(i - 1 - box.lo)];
            else best = std::max(row[static_cast<std::size_t>(i - 1 - box.lo)],
                                 prev[static_cast<std::size_t>(i + 1 - box.lo)]);
            row[static_cast<std::size_t>(i - box.lo)] = w + best;
        }
        table.rows_.push_back(row);
        prev.swap(row);
    }
    return table;
}

// Normalized vertical restricted time T_B((x0,0),(x0,m))/m; estimates the
// reciprocal of the box's stationary current for large m.
template <typename RateF, typename ServiceF>
double t_infinity_estimate(RateF&& alpha, ServiceF&& service, Interval box, std::int64_t x0, std::int64_t m) {
    if (m < 1) throw validation_error("t_infinity_estimate: m must be >= 1");
    if (!box.contains(x0)) throw validation_error("t_infinity_estimate: x0 outside box");
    return restricted_passage_time(alpha, service, box, Point{x0, 0}, Point{x0, m}) / static_cast<double>(m);
}

// ---------------------------------------------------------------------------
// Skeletons: traces of a level-(n+1) path on the level-n interface columns.
// Legs l = 1..l_n carry (cross_gain, interface_gain) = height gained while
// crossing subblock l and while sitting at its far interface column. The
// gains sum to the total height (plus one for leftward paths, whose block
// entries each consume an up-left step).
// ---------------------------------------------------------------------------

struct Skeleton {
    int sigma = 1;
    std::vector<std::int64_t> cross_gain;     // >= K_n each when sigma = -1
    std::vector<std::int64_t> interface_gain; // >= 0
};

unsigned long long skeleton_count(std::int64_t legs, std::int64_t block_len, std::int64_t y_prime, int sigma);

std::vector<Skeleton> enumerate_skeletons(std::int64_t legs, std::int64_t block_len, std::int64_t y_prime,
                                          int sigma, std::size_t cap = 1'000'000);

// U-legs (subblock crossings) and V-legs (interface columns) of one skeleton.
struct SkeletonLegGeometry {
    Point u_from, u_to; // restricted to the subblock
    Interval u_box;
    Point v_from, v_to; // restricted to the full block
    Interval v_box;
};

std::vector<SkeletonLegGeometry> skeleton_geometry(std::int64_t block_len_next, std::int64_t block_len,
                                                   const Skeleton& s);

template <typename RateF, typename ServiceF>
double skeleton_passage_value(RateF&& alpha, ServiceF&& service, std::int64_t block_len_next,
                              std::int64_t block_len, const Skeleton& s) {
    double total = 0.0;
    for (const auto& leg : skeleton_geometry(block_len_next, block_len, s)) {
        total += restricted_passage_time(alpha, service, leg.u_box, leg.u_from, leg.u_to,
                                         DpKernel::serial_reference);
        total += restricted_passage_time(alpha, service, leg.v_box, leg.v_from, leg.v_to,
                                         DpKernel::serial_reference);
    }
    return total;
}

struct SkeletonCheck {
    double max_over_skeletons = 0.0;
    double direct = 0.0;
    std::size_t skeletons = 0;
    bool equal(double tol = 1e-9) const { return std::fabs(max_over_skeletons - direct) <= tol; }
};

template <typename RateF, typename ServiceF>
SkeletonCheck skeleton_decomposition_check(RateF&& alpha, ServiceF&& service, std::int64_t block_len_next,
                                           std::int64_t block_len, std::int64_t y_prime, int sigma,
                                           std::size_t cap = 1'000'000) {
    const auto skeletons = enumerate_skeletons(block_len_next / block_len, block_len, y_prime, sigma, cap);
    SkeletonCheck check;
    check.skeletons = skeletons.size();
    check.max_over_skeletons = lpp_detail::kMinusInf;
    for (const auto& s : skeletons)
        check.max_over_skeletons =
            std::max(check.max_over_skeletons, skeleton_passage_value(alpha, service, block_len_next, block_len, s));
    const std::int64_t xe = sigma > 0 ? block_len_next - 1 : -(block_len_next - 1);
    const Interval block = sigma > 0 ? Interval{0, block_len_next - 1} : Interval{-(block_len_next - 1), 0};
    check.direct = restricted_passage_time(alpha, service, block, Point{0, 0}, Point{xe, y_prime},
                                           DpKernel::serial_reference);
    return check;
}

// ---------------------------------------------------------------------------
// Monte Carlo estimators
// ---------------------------------------------------------------------------

struct MeanEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    int replicas = 0;
};

// Rescaled passage time tau(x,y) ~ T([Nx],[Ny])/N, averaged over disorder and
// service replicas.
MeanEstimate shape_estimate(const DisorderSpec& spec, double x, double y, std::int64_t N, int replicas,
                            std::uint64_t seed, std::size_t cell_budget = std::size_t{1} << 34);

// Normalized corner-to-corner restricted time over one block, averaged over
// service replicas. sigma=+1 runs left->right, sigma=-1 right->left.
MeanEstimate tau_block(const Environment& env, Interval block, int sigma, double y, int replicas,
                       std::uint64_t seed);

} // namespace taseplab

#endif
