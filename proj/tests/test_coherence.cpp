#include "berry/coherence.hpp"
#include "berry/meanfield.hpp"
#include "berry/oracle.hpp"
#include "berry/sectored_state.hpp"

#include "doctest.h"

#include <cmath>

using namespace berry;

TEST_SUITE("coherence") {

TEST_CASE("beta for a single excitation") {
    const std::vector<double> b = beta_coefficients(3, 4, 1);
    REQUIRE(b.size() == 2);
    CHECK(b[0] == 1.0);
    CHECK(b[1] == doctest::Approx(std::sqrt(12.0) / 3.5).epsilon(1e-12));
    CHECK(b[1] == doctest::Approx(0.98974).epsilon(1e-5));
}

TEST_CASE("survival approximation") {
    const Survival s = survival_fraction(100, 102, 10);
    CHECK(s.approx == doctest::Approx(1.0 - 40.0 / 72000.0).epsilon(1e-12));
    CHECK(s.approx == doctest::Approx(0.999444).epsilon(1e-6));
    const std::vector<double> b = beta_coefficients(100, 102, 10);
    double prod = 1.0;
    for (int k = 1; k <= 10; ++k) prod *= b[k];
    CHECK(s.exact == doctest::Approx(prod).epsilon(1e-12));
    CHECK(std::abs(s.difference) <= survival_error_bound(100, 102, 10) * s.exact);
}

TEST_CASE("survival deficit at sqrt(N) separation") {
    const int NJ = 400, NJp = NJ + 20, nE = 40;
    const Survival s = survival_fraction(NJ, NJp, nE);
    CHECK(s.exact >= 1.0 - nE / (8.0 * (NJ - nE)) * 400.0 / NJ - 1e-12);
    CHECK(1.0 - s.exact > 1e-3);
}

TEST_CASE("single excitation transfers beta_1 of the coherence") {
    const CoherenceLadder l = CoherenceLadder::make(3, 4, {0.0, 1.0});
    const RateEquationResult r = evolve_rate_equation(l, 50.0);
    const double b1 = beta_coefficients(3, 4, 1)[1];
    CHECK(std::abs(r.asymptote - cplx(b1, 0.0)) < 1e-12);
    CHECK(std::abs(r.c0.back() - r.asymptote) < 1e-8);
    CHECK(r.orthonormality < 1e-12);
}

TEST_CASE("left null vector is a product of betas") {
    const CoherenceLadder l = CoherenceLadder::make(20, 22, std::vector<cplx>(6, 1.0));
    const std::vector<double> u = left_null_vector(l);
    const std::vector<double> b = beta_coefficients(20, 22, 5);
    double p = 1.0;
    for (int k = 0; k <= 5; ++k) {
        if (k) p *= b[k];
        CHECK(u[k] == doctest::Approx(p).epsilon(1e-12));
    }
}

} // TEST_SUITE

TEST_SUITE("oracle") {

TEST_CASE("three-level basis dimensions") {
    const ThreeLevelBasis b(4);
    CHECK(b.dim() == 15);
    for (int NJ = 0; NJ <= 4; ++NJ) CHECK(b.block_size(NJ) == NJ + 1);
}

TEST_CASE("product state equals the full-window sectored state") {
    const ThreeLevelBasis b(6);
    const auto a = product_state(b, 0.3);
    const auto s = from_sectored(b, init_state(6, 3, 0.3));
    for (int i = 0; i < b.dim(); ++i) CHECK(std::abs(a[i] - s[i]) < 1e-12);
}

TEST_CASE("master equation preserves trace and positivity") {
    EffectiveSpinParams p;
    p.N = 4;
    p.delta = 1.2;
    p.Omega = drive_for_angle(p.delta, 2.0, 0.5);
    const ThreeLevelBasis b(4);
    const ThreeLevelResult r = lindblad_threelevel(p, product_state(b, 0.0), {0.0, 0.5, 1.0, 12.0}, 1.0);
    for (double e : r.traceError) CHECK(e < 1e-9);
    CHECK(r.maxHermiticityError < 1e-9);
    CHECK(r.minEigenvalue > -1e-9);
    CHECK(r.crossBlockLeakage < 1e-12);
    CHECK(e_fraction(r.moments.back()) < 1e-3);
}

TEST_CASE("undriven ground manifold is dark") {
    EffectiveSpinParams p;
    p.N = 3;
    p.delta = 0.7;
    const ThreeLevelBasis b(3);
    const ThreeLevelResult r = lindblad_threelevel(p, product_state(b, 0.5), {0.0, 2.0}, 0.0);
    const Vec9c d = r.moments.back().first - r.moments.front().first;
    CHECK(d.norm() < 1e-10);
}

} // TEST_SUITE
