// Timing comparison of the serial reference kernels against the OpenMP
// ones: one big passage grid (row sweep vs diagonal wavefront) and a
// replica-parallel flux curve at 1 vs all threads. Values are checked to
// be identical while timing.

#include <chrono>
#include <cstdio>

#include "taseplab/disorder.hpp"
#include "taseplab/lpp.hpp"
#include "taseplab/parallel.hpp"
#include "taseplab/tasep.hpp"

using namespace taseplab;

namespace {
double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}
} // namespace

int main() {
    std::printf("workers available: %d\n\n", worker_count());

    {
        const ServiceField f{2024};
        auto unit = [](std::int64_t) { return 1.0; };
        const Point to{1500, 1500};
        auto t0 = std::chrono::steady_clock::now();
        const double serial = passage_time(unit, f, {0, 0}, to, DpKernel::serial_reference);
        const double ts = seconds_since(t0);
        t0 = std::chrono::steady_clock::now();
        const double wave = passage_time(unit, f, {0, 0}, to, DpKernel::wavefront);
        const double tw = seconds_since(t0);
        std::printf("passage grid to (%lld,%lld): serial %.3fs, wavefront %.3fs, speedup %.2fx, %s\n",
                    static_cast<long long>(to.x), static_cast<long long>(to.y), ts, tw, ts / tw,
                    serial == wave ? "identical" : "MISMATCH");
    }

    {
        DisorderSpec spec;
        spec.epsilon = 0.3;
        spec.r = 0.2;
        spec.R = 0.2;
        const std::vector<double> densities{0.3, 0.5, 0.7};
        const int hw = worker_count();

        set_worker_count(1);
        auto t0 = std::chrono::steady_clock::now();
        const auto serial = flux_curve(spec, densities, 1024, 4000.0, 4, 7);
        const double ts = seconds_since(t0);

        set_worker_count(hw);
        t0 = std::chrono::steady_clock::now();
        const auto parallel = flux_curve(spec, densities, 1024, 4000.0, 4, 7);
        const double tp = seconds_since(t0);

        bool same = true;
        for (std::size_t i = 0; i < serial.samples.size(); ++i)
            same = same && serial.samples[i].flux == parallel.samples[i].flux;
        std::printf("flux curve (3 densities x 4 replicas): 1 thread %.3fs, %d threads %.3fs, "
                    "speedup %.2fx, %s\n",
                    ts, hw, tp, ts / tp, same ? "identical" : "MISMATCH");
    }
    return 0;
}
