#include "berry/errors.hpp"
#include "berry/meanfield.hpp"
#include "berry/params.hpp"

#include "doctest.h"

#include <cmath>

using namespace berry;

TEST_SUITE("params") {

TEST_CASE("derive_effective hand values") {
    CavityParams c;
    c.g_c = 0.5;
    c.kappa = 100.0;
    c.Delta = 50.0;
    c.N = 10;
    const EffectiveSpinParams p = derive_effective(c);
    CHECK(p.chi == doctest::Approx(0.0025).epsilon(1e-12));
    CHECK(p.GammaDelta == doctest::Approx(0.005).epsilon(1e-12));
    CHECK(p.chi / p.GammaDelta == doctest::Approx(c.Delta / c.kappa).epsilon(1e-12));
}

TEST_CASE("derive_effective resonant drive mapping") {
    CavityParams c;
    c.g_c = 1.0;
    c.kappa = 40.0;
    c.epsilon = 3.0;
    c.N = 10;
    const EffectiveSpinParams p = derive_effective(c);
    CHECK(p.Gamma == doctest::Approx(4.0 / 40.0));
    CHECK(std::abs(p.Omega) == doctest::Approx(4.0 * 3.0 / 40.0));
    CHECK(p.chi == doctest::Approx(0.0));
}

TEST_CASE("derive_effective rejects bad input") {
    CavityParams c;
    c.g_c = 1.0;
    c.kappa = 0.0;
    CHECK_THROWS_AS(derive_effective(c), InvalidParameter);
    c.kappa = 1.0;
    c.N = 0;
    CHECK_THROWS_AS(derive_effective(c), InvalidParameter);
}

TEST_CASE("classify_phase") {
    EffectiveSpinParams p;
    p.N = 100;
    p.Gamma = 1.0;
    p.Omega = 20.0;
    CHECK(classify_phase(p, 100).kind == Phase::Polarized);
    CHECK(classify_phase(p, 100).OmegaC == doctest::Approx(50.0));
    p.Omega = 50.0;
    CHECK(classify_phase(p, 100).kind == Phase::Critical);
    p.Omega = 80.0;
    CHECK(classify_phase(p, 100).kind == Phase::Mixed);
}

} // TEST_SUITE

TEST_SUITE("meanfield") {

TEST_CASE("steady state with detuning") {
    EffectiveSpinParams p;
    const double NJ = 100.0;
    p.N = 100;
    p.Omega = 0.46637 * NJ;
    p.delta = 0.1 * NJ;
    const BlochSteadyState s = solve_steady_state(p, NJ);
    CHECK(std::cos(s.thetaJ) == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(std::sin(s.phiJ) == doctest::Approx(0.9285).epsilon(1e-3));
    CHECK(std::cos(s.phiJ) == doctest::Approx(0.3714).epsilon(1e-3));
    CHECK(std::abs(s.residualRatio) < 1e-8 * NJ);
    CHECK(std::abs(s.residualBalance) < 1e-8 * NJ);
}

TEST_CASE("steady state resonant closed form") {
    EffectiveSpinParams p;
    p.N = 200;
    p.Omega = 0.3 * 200 / 2.0;
    const BlochSteadyState s = solve_steady_state(p, 200);
    CHECK(std::cos(s.thetaJ) == doctest::Approx(std::sqrt(1.0 - 0.09)).epsilon(1e-9));
    CHECK(s.phiJ == doctest::Approx(M_PI / 2).epsilon(1e-9));
}

TEST_CASE("mixed phase has no polarized root") {
    EffectiveSpinParams p;
    p.N = 100;
    p.Omega = 80.0;
    CHECK_THROWS_AS(solve_steady_state(p, 100), MixedPhaseError);
}

TEST_CASE("drive_for_angle inverts the steady state") {
    const double NJ = 500.0, delta = 0.05 * 1000;
    const double Omega = drive_for_angle(delta, NJ, 0.5);
    EffectiveSpinParams p;
    p.N = 1000;
    p.Omega = Omega;
    p.delta = delta;
    CHECK(std::cos(solve_steady_state(p, NJ).thetaJ) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("spin mean field relaxes to the resonant steady state") {
    EffectiveSpinParams p;
    p.N = 50;
    p.Omega = 0.6 * 25.0 / 2.0;
    const MeanFieldSeries s = integrate_spin_mf(p, bloch_state(50, 25, 0.0, 0.0), 2.0, 0.5);
    const auto& f = s.states.back();
    const double NJ = std::norm(f.d) + std::norm(f.e);
    CHECK(NJ == doctest::Approx(25.0).epsilon(1e-8));
    CHECK((std::norm(f.d) - std::norm(f.e)) / NJ == doctest::Approx(std::sqrt(1.0 - 0.36)).epsilon(1e-6));
    CHECK(std::abs(std::real(std::conj(f.d) * f.e)) < 1e-6 * NJ);
}

TEST_CASE("spin mean field conserves the inter-sector coherence") {
    EffectiveSpinParams p;
    p.N = 40;
    p.Omega = 8.0;
    p.delta = 3.0;
    const MeanFieldSeries s = integrate_spin_mf(p, bloch_state(40, 20, 0.4, 0.3), 1.0, 0.01);
    for (double c : s.coherence) CHECK(std::abs(c - s.coherence.front()) <= 1e-8 * 40 * 40);
}

TEST_CASE("berry frequency") {
    CHECK(berry_frequency(2.0, 0.5) == doctest::Approx(1.0));
    CHECK(berry_frequency(2.0, 1.0) == doctest::Approx(0.0));
}

} // TEST_SUITE
