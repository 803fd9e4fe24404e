#include "berry/meanfield.hpp"
#include "berry/squeezing.hpp"
#include "berry/trajectories.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

using namespace berry;

static double seconds(const std::function<void()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

static void report(const char* name, double serial, double parallel, double diff) {
    std::printf("%-10s serial %8.3f s  openmp %8.3f s  speedup %5.2f  max|diff| %.3g\n", name, serial, parallel,
                serial / parallel, diff);
}

int main(int argc, char** argv) {
    const int threads = argc > 1 ? std::atoi(argv[1]) : omp_get_max_threads();
    omp_set_num_threads(threads);
    std::printf("threads %d\n", threads);

    ScanSpec spec;
    spec.setup.N = 1e6;
    spec.setup.rates.gammaEUp = 0.01;
    spec.setup.rates.gammaD = 0.01;
    spec.nDelta = 48;
    spec.nCos = 48;
    ScanResult a, b;
    const double ts = seconds([&] { a = scan_grid_serial(spec); });
    const double tp = seconds([&] { b = scan_grid(spec); });
    double d = 0.0;
    for (std::size_t i = 0; i < a.xi2OptdB.size(); ++i)
        if (std::isfinite(a.xi2OptdB[i])) d = std::max(d, std::abs(a.xi2OptdB[i] - b.xi2OptdB[i]));
    report("scan_grid", ts, tp, d);

    EffectiveSpinParams p;
    p.N = 40;
    p.delta = 0.05 * p.N;
    p.Omega = drive_for_angle(p.delta, 0.5 * p.N, 0.5);
    Schedule s;
    s.tOff = 0.3;
    s.tEnd = 0.4;
    s.dtBase = 1.0 / (250.0 * p.N);
    s.dN = 6;
    s.nTraj = 256;
    s.seed = 7;
    s.sampleEvery = 0.1;
    EnsembleOptions serial, parallel;
    serial.parallel = false;
    parallel.threads = threads;
    EnsembleResult ra, rb;
    const double es = seconds([&] { ra = run_ensemble(p, s, serial); });
    const double ep = seconds([&] { rb = run_ensemble(p, s, parallel); });
    const double de = std::abs(ra.samples.back().report.xi2dB - rb.samples.back().report.xi2dB);
    report("ensemble", es, ep, de);
    return 0;
}
