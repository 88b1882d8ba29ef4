#include "taseplab/lpp.hpp"

#include <algorithm>
#include <cmath>

#include "taseplab/parallel.hpp"

namespace taseplab {

std::vector<Point> PassageGrid::optimal_path() const {
    std::vector<Point> path;
    Point p = to;
    while (!(p.x == from.x && p.y == from.y)) {
        path.push_back(p);
        // ties go to the horizontal predecessor
        if (at(p.x - 1, p.y) >= at(p.x + 1, p.y - 1)) p = Point{p.x - 1, p.y};
        else p = Point{p.x + 1, p.y - 1};
    }
    path.push_back(from);
    std::reverse(path.begin(), path.end());
    return path;
}

std::vector<Point> reachable_cells(Point from, Point to, const Interval* box) {
    const auto rg = lpp_detail::make_ranges(from, to, box);
    std::vector<Point> cells;
    for (std::int64_t j = from.y; j <= to.y; ++j)
        for (std::int64_t i = rg.row_lo(j); i <= rg.row_hi(j); ++i) cells.push_back(Point{i, j});
    return cells;
}

unsigned long long skeleton_count(std::int64_t legs, std::int64_t block_len, std::int64_t y_prime, int sigma) {
    if (legs < 1 || y_prime < 0) throw validation_error("skeleton_count: bad arguments");
    // free height after the per-leg minima; sigma=-1 paths carry one extra
    // unit because each of their block entries is an up-left step
    const std::int64_t total = y_prime + (sigma < 0 ? 1 : 0);
    const std::int64_t slack = sigma < 0 ? total - legs * block_len : total;
    if (slack < 0) return 0;
    // compositions of slack into 2*legs nonnegative parts
    const std::int64_t n = slack + 2 * legs - 1, k = 2 * legs - 1;
    unsigned long long result = 1;
    for (std::int64_t i = 1; i <= k; ++i) {
        const unsigned long long num = static_cast<unsigned long long>(n - k + i);
        if (result > ~0ULL / num) throw budget_error("skeleton_count: overflow");
        result = result * num / static_cast<unsigned long long>(i);
    }
    return result;
}

std::vector<Skeleton> enumerate_skeletons(std::int64_t legs, std::int64_t block_len, std::int64_t y_prime,
                                          int sigma, std::size_t cap) {
    const unsigned long long count = skeleton_count(legs, block_len, y_prime, sigma);
    if (count > cap) throw budget_error("enumerate_skeletons: cap exceeded (" + std::to_string(count) + ")");

    const std::int64_t min_cross = sigma < 0 ? block_len : 0;
    const std::int64_t total = y_prime + (sigma < 0 ? 1 : 0);
    std::vector<Skeleton> out;
    out.reserve(static_cast<std::size_t>(count));
    Skeleton cur;
    cur.sigma = sigma;
    cur.cross_gain.assign(static_cast<std::size_t>(legs), 0);
    cur.interface_gain.assign(static_cast<std::size_t>(legs), 0);

    // assign slot 0..2*legs-1, alternating cross/interface, left to right
    auto rec = [&](auto&& self, std::int64_t slot, std::int64_t remaining) -> void {
        if (slot == 2 * legs - 1) {
            cur.interface_gain[static_cast<std::size_t>(legs - 1)] = remaining;
            out.push_back(cur);
            return;
        }
        const bool is_cross = slot % 2 == 0;
        const std::int64_t leg = slot / 2;
        const std::int64_t lo = is_cross ? min_cross : 0;
        // leave room for the minima of the remaining cross slots
        std::int64_t reserved = 0;
        for (std::int64_t s = slot + 1; s < 2 * legs; ++s)
            if (s % 2 == 0) reserved += min_cross;
        for (std::int64_t v = lo; v + reserved <= remaining; ++v) {
            if (is_cross) cur.cross_gain[static_cast<std::size_t>(leg)] = v;
            else cur.interface_gain[static_cast<std::size_t>(leg)] = v;
            self(self, slot + 1, remaining - v);
        }
    };
    if (total >= legs * min_cross) rec(rec, 0, total);
    return out;
}

std::vector<SkeletonLegGeometry> skeleton_geometry(std::int64_t block_len_next, std::int64_t block_len,
                                                   const Skeleton& s) {
    const std::int64_t legs = static_cast<std::int64_t>(s.cross_gain.size());
    if (legs * block_len != block_len_next)
        throw validation_error("skeleton_geometry: block sizes do not tile");
    const int sigma = s.sigma;
    const Interval block = sigma > 0 ? Interval{0, block_len_next - 1} : Interval{-(block_len_next - 1), 0};

    std::vector<SkeletonLegGeometry> out;
    std::int64_t entry_height = 0;
    for (std::int64_t l = 1; l <= legs; ++l) {
        const auto idx = static_cast<std::size_t>(l - 1);
        const std::int64_t rise = s.cross_gain[idx], hold = s.interface_gain[idx];
        SkeletonLegGeometry leg;
        const std::int64_t a = sigma * (l - 1) * block_len;
        const std::int64_t b = sigma * (l * block_len - 1);
        leg.u_box = sigma > 0 ? Interval{a, b} : Interval{b, a};
        leg.u_from = Point{a, entry_height};
        leg.u_to = Point{sigma * (l * block_len - 2), entry_height + rise + sigma - 1};
        leg.v_box = block;
        const std::int64_t v_base = entry_height + rise + (sigma - 1) / 2;
        leg.v_from = Point{b, v_base};
        leg.v_to = Point{b, v_base + hold};
        out.push_back(leg);
        entry_height += rise + hold;
    }
    return out;
}

MeanEstimate shape_estimate(const DisorderSpec& spec, double x, double y, std::int64_t N, int replicas,
                            std::uint64_t seed, std::size_t cell_budget) {
    spec.validate();
    if (!(y >= 0.0 && x + y >= 0.0)) throw validation_error("shape_estimate: (x,y) outside the wedge");
    if (N < 1 || replicas < 1) throw validation_error("shape_estimate: N and replicas must be positive");
    const Point to{static_cast<std::int64_t>(std::floor(x * static_cast<double>(N))),
                   static_cast<std::int64_t>(std::floor(y * static_cast<double>(N)))};
    // surface the budget before spawning replicas
    const auto rg = lpp_detail::make_ranges(Point{0, 0}, to, nullptr);
    if (rg.cells() > cell_budget) throw budget_error("shape_estimate: grid cell budget exceeded");

    std::vector<double> vals(static_cast<std::size_t>(replicas));
    parallel_for(replicas, [&](std::int64_t rep) {
        DisorderSpec local = spec;
        local.seed = derive_seed(seed, "shape-env", static_cast<std::uint64_t>(rep));
        const ServiceField field{derive_seed(seed, "shape-services", static_cast<std::uint64_t>(rep))};
        const double T = passage_time([&](std::int64_t i) { return local.rate(i); }, field, Point{0, 0}, to,
                                      DpKernel::serial_reference, cell_budget);
        vals[static_cast<std::size_t>(rep)] = T / static_cast<double>(N);
    });

    MeanEstimate est;
    est.replicas = replicas;
    for (double v : vals) est.value += v;
    est.value /= replicas;
    if (replicas > 1) {
        double var = 0.0;
        for (double v : vals) var += (v - est.value) * (v - est.value);
        est.stderr_ = std::sqrt(var / (replicas - 1) / replicas);
    }
    return est;
}

MeanEstimate tau_block(const Environment& env, Interval block, int sigma, double y, int replicas,
                       std::uint64_t seed) {
    if (sigma != 1 && sigma != -1) throw validation_error("tau_block: sigma must be +1 or -1");
    const double sigma_minus = sigma < 0 ? 1.0 : 0.0;
    if (!(y >= sigma_minus)) throw validation_error("tau_block: y below the direction's lower bound");
    const std::int64_t K = block.length();
    const Point from = sigma > 0 ? Point{block.lo, 0} : Point{block.hi, 0};
    const Point to = sigma > 0
                         ? Point{block.hi, static_cast<std::int64_t>(std::floor(y * static_cast<double>(K)))}
                         : Point{block.lo, static_cast<std::int64_t>(std::floor(y * static_cast<double>(K)))};

    std::vector<double> vals(static_cast<std::size_t>(replicas));
    parallel_for(replicas, [&](std::int64_t rep) {
        const ServiceField field{derive_seed(seed, "tau-block", static_cast<std::uint64_t>(rep))};
        vals[static_cast<std::size_t>(rep)] =
            restricted_passage_time([&](std::int64_t i) { return env.rate(i); }, field, block, from, to) /
            static_cast<double>(K);
    });

    MeanEstimate est;
    est.replicas = replicas;
    for (double v : vals) est.value += v;
    est.value /= replicas;
    if (replicas > 1) {
        double var = 0.0;
        for (double v : vals) var += (v - est.value) * (v - est.value);
        est.stderr_ = std::sqrt(var / (replicas - 1) / replicas);
    }
    return est;
}

} // namespace taseplab
