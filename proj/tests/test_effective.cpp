#include "berry/effective.hpp"
#include "berry/errors.hpp"
#include "berry/oracle.hpp"
#include "berry/squeezing.hpp"

#include "doctest.h"

#include <cmath>

using namespace berry;

TEST_SUITE("effective") {

TEST_CASE("berry eigenstate magnetization") {
    const BerryEigenstate s = berry_eigenstate(40, 0.6, 0.0);
    CHECK(std::abs(s.Jz + 20.0 * std::sqrt(1.0 - 0.36)) <= 0.5);
    double n = 0.0;
    for (auto a : s.amps) n += std::norm(a);
    CHECK(n == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("berry eigenstate residual shrinks with N_J") {
    const double r20 = berry_eigenstate(20, 0.6, 0.3).residual;
    const double r40 = berry_eigenstate(40, 0.6, 0.3).residual;
    const double r80 = berry_eigenstate(80, 0.6, 0.3).residual;
    CHECK(r40 < r20);
    CHECK(r80 < r40);
}

TEST_CASE("berry eigenstate rejects o outside [0, 1)") {
    CHECK_THROWS_AS(berry_eigenstate(10, 1.2, 0.0), Error);
}

TEST_CASE("adiabatic model hand values") {
    const double N = 1000.0;
    const TwistingModel m = adiabatic_model(N, std::acos(0.5), 0.01 * N, 1.0);
    CHECK(m.chiCheck == doctest::Approx(0.03).epsilon(1e-9));
    CHECK(m.ratio == doctest::Approx(1.5625).epsilon(1e-9));
    CHECK(m.chiSign == -1);
}

TEST_CASE("hp model at the benchmark point") {
    SqueezingSetup s;
    s.N = 1000;
    const TwistingModel m = build_model(s, 0.05 * s.N, 0.5);
    CHECK(m.chiCheck == doctest::Approx(0.0915).epsilon(0.005));
    CHECK(m.GammaCheck == doctest::Approx(0.207).epsilon(0.005));
    CHECK(m.ratio == doctest::Approx(0.442).epsilon(0.005));
}

TEST_CASE("weak drive model limits") {
    const double N = 1e4;
    const TwistingModel big = weak_drive_model(N, 1e-3 * N, 10.0 * N, 0.2, 0.2);
    CHECK(big.ratio == doctest::Approx(1.0).epsilon(0.02));
    const double delta = 1e-6 * N;
    const cplx Omega = 5e-3 * N;
    const TwistingModel w = weak_drive_model(N, Omega, delta, 0.0, 1.0);
    const TwistingModel a = adiabatic_model(N, w.thetaTilde, delta, 1.0);
    CHECK(w.ratio == doctest::Approx(a.ratio).epsilon(0.05));
}

TEST_CASE("hp validity") {
    SqueezingSetup s;
    s.N = 1e6;
    const TwistingModel m = build_model(s, 0.05 * s.N, 0.5);
    CHECK(hp_validity(m, s.N, 1.0).pass);
    CHECK(hp_validity(m, s.N, 1.0).ratio > 10.0);
    SqueezingSetup t;
    t.N = 10;
    const TwistingModel small = build_model(t, 0.05 * t.N, 0.1);
    CHECK_FALSE(hp_validity(small, t.N, 1.0).pass);
}

} // TEST_SUITE

TEST_SUITE("squeezing") {

TwistingModel pure_oat(double chi) {
    TwistingModel m;
    m.chiCheck = chi;
    m.GammaCheck = 0.0;
    return m;
}

TEST_CASE("expansion optimum without decoherence") {
    const double N = 1000.0;
    const TwistingModel m = pure_oat(1.0);
    const double t = std::pow(3.0, 1.0 / 6.0) / std::pow(N, 2.0 / 3.0);
    const double expect = std::pow(3.0, 2.0 / 3.0) / (2.0 * std::pow(N, 2.0 / 3.0));
    CHECK(xi2_expansion(t, m, N) == doctest::Approx(expect).epsilon(1e-9));
    CHECK(to_dB(expect) == doctest::Approx(-19.8).epsilon(0.01));
    const TimeOptimum o = optimize_time(m, N);
    CHECK(o.t == doctest::Approx(t).epsilon(1e-5));
}

TEST_CASE("expansion at the benchmark model") {
    TwistingModel m;
    m.chiCheck = 0.0915;
    m.GammaCheck = 0.207;
    CHECK(xi2_expansion(0.17, m, 1000) == doctest::Approx(0.159).epsilon(0.01));
}

TEST_CASE("collective_exact approaches the expansion at small chi t") {
    const TwistingModel m = pure_oat(1.0);
    const int N = 100000;
    const double tOpt = optimize_time(m, N).t;
    const double t = 0.3 * tOpt;
    CHECK(collective_exact(t, m, N) == doctest::Approx(xi2_expansion(t, m, N)).epsilon(0.01));
    double prev = INFINITY;
    for (int n : {100, 1000, 10000}) {
        const double to = optimize_time(m, n).t;
        const double err = std::abs(collective_exact(to, m, n) / xi2_expansion(to, m, n) - 1.0);
        CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("collective_exact matches the permutation-symmetric oracle at N = 4") {
    TwistingModel m;
    m.chiCheck = 0.7;
    m.GammaCheck = 0.3;
    const std::vector<double> times = {0.0, 0.2, 0.5, 1.0};
    const EffectiveOracleResult o = lindblad_effective(m, 4, times);
    for (std::size_t i = 0; i < times.size(); ++i) {
        CHECK(std::abs(o.xi2[i] - collective_exact(times[i], m, 4)) <= 1e-10);
        CHECK(o.traceError[i] <= 1e-12);
    }
}

TEST_CASE("closed forms: spin flip") {
    ClosedFormInput in;
    in.N = 1e6;
    in.gammaEUp = 1.0;
    const ClosedFormResult r = closed_form_limits(in, ClosedFormRegime::SpinFlipResonant);
    CHECK(to_dB(r.xi2) == doctest::Approx(-24.7).epsilon(0.005));
    in.kappa = 100.0;
    const ClosedFormResult d = closed_form_limits(in, ClosedFormRegime::SpinFlipDispersive);
    CHECK(d.xi2 == doctest::Approx(r.xi2));
    CHECK(d.t == r.t);
}

TEST_CASE("optimize over t and delta recovers the diamond region") {
    SqueezingSetup s;
    s.N = 1e6;
    s.rates.gammaEUp = 1.0;
    const Optimum o = optimize(s, 0.014 * s.N, 0.99, {true, false, false});
    CHECK(o.xi2dB == doctest::Approx(-24.4).epsilon(0.03));
}

TEST_CASE("anchor table") {
    const auto rows = anchor_table();
    REQUIRE(rows.size() == 5);
    for (const auto& r : rows) CHECK_MESSAGE(r.pass, r.symbol);
}

TEST_CASE("scan kernels agree") {
    ScanSpec spec;
    spec.setup.N = 1e5;
    spec.setup.rates.gammaD = 0.1;
    spec.nDelta = 12;
    spec.nCos = 10;
    const ScanResult a = scan_grid(spec), b = scan_grid_serial(spec);
    REQUIRE(a.xi2OptdB.size() == b.xi2OptdB.size());
    for (std::size_t i = 0; i < a.xi2OptdB.size(); ++i)
        if (std::isfinite(a.xi2OptdB[i])) CHECK(a.xi2OptdB[i] == b.xi2OptdB[i]);
}

} // TEST_SUITE
