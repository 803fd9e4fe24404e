#include "berry/covariance.hpp"
#include "berry/meanfield.hpp"
#include "berry/sectored_state.hpp"
#include "berry/trajectories.hpp"

#include "doctest.h"

#include <cmath>
#include <random>

using namespace berry;

namespace {

// Full 3^N product space; site letter 0 = down, 1 = e, 2 = up.
std::vector<cplx> embed(const SectoredState& s) {
    const int N = s.N();
    int dim = 1;
    for (int i = 0; i < N; ++i) dim *= 3;
    std::vector<cplx> out(dim, 0.0);
    for (int idx = 0; idx < dim; ++idx) {
        int n[3] = {0, 0, 0};
        for (int k = 0, v = idx; k < N; ++k, v /= 3) ++n[v % 3];
        const int NJ = n[0] + n[1];
        if (!s.contains(NJ)) continue;
        const double multi = std::tgamma(N + 1.0) / (std::tgamma(n[0] + 1.0) * std::tgamma(n[1] + 1.0) * std::tgamma(n[2] + 1.0));
        out[idx] = s.sector(NJ)[n[1]] / std::sqrt(multi);
    }
    return out;
}

std::vector<cplx> dense_apply(const std::vector<cplx>& psi, const Mat3c& M, int N) {
    std::vector<cplx> out(psi.size(), 0.0);
    int p = 1;
    for (int site = 0; site < N; ++site, p *= 3)
        for (int idx = 0; idx < int(psi.size()); ++idx) {
            const int nu = (idx / p) % 3;
            for (int mu = 0; mu < 3; ++mu) out[idx + (mu - nu) * p] += M(mu, nu) * psi[idx];
        }
    return out;
}

double binomial_weight(int N, int k) {
    return std::exp(std::lgamma(N + 1.0) - std::lgamma(k + 1.0) - std::lgamma(N - k + 1.0) - N * std::log(2.0));
}

EffectiveSpinParams small_params(int N) {
    EffectiveSpinParams p;
    p.N = N;
    p.delta = 0.3 * N;
    p.Omega = drive_for_angle(p.delta, 0.5 * N, 0.5);
    return p;
}

Schedule small_schedule(int N, int nTraj) {
    Schedule s;
    s.tOff = 0.3;
    s.tEnd = 0.5;
    s.dtBase = 1.0 / (250.0 * N);
    s.dN = 3;
    s.nTraj = nTraj;
    s.seed = 11;
    s.sampleEvery = 0.1;
    return s;
}

} // namespace

TEST_SUITE("trajectories") {

TEST_CASE("init_state captures the binomial weight") {
    const int N = 1000, dN = 80;
    double captured = 0.0;
    for (int k = N / 2 - dN; k <= N / 2 + dN; ++k) captured += binomial_weight(N, k);
    CHECK(captured >= 1.0 - 1e-6);
    const SectoredState s = init_state(N, dN, 0.4);
    CHECK(s.norm2() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.sector_norm2(N / 2) == doctest::Approx(binomial_weight(N, N / 2) / captured).epsilon(1e-10));
    CHECK(std::arg(s.sector(N / 2 + 1)[0] / s.sector(N / 2)[0]) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("init_state rejects invalid input") {
    CHECK_THROWS(init_state(0, 1, 0.0));
    CHECK_THROWS(init_state(10, -1, 0.0));
}

TEST_CASE("apply_bilinear matches the dense product-space operator at N = 3") {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> g;
    const int N = 3;
    SectoredState psi(N, 0, N);
    for (auto& a : psi.data()) a = cplx(g(gen), g(gen));
    psi.normalize();
    Mat3c M;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) M(i, j) = cplx(g(gen), g(gen));
    const Mat3c H = 0.5 * (M + M.adjoint());

    const std::vector<cplx> dense = dense_apply(embed(psi), H, N);
    const std::vector<cplx> sect = embed(apply_bilinear(psi, H, true));
    double err = 0.0;
    for (std::size_t i = 0; i < dense.size(); ++i) err = std::max(err, std::abs(dense[i] - sect[i]));
    CHECK(err < 1e-12);
    const cplx ev = inner(psi, apply_bilinear(psi, H, true));
    const std::vector<cplx> e = embed(psi);
    cplx evDense = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) evDense += std::conj(e[i]) * dense[i];
    CHECK(std::abs(ev - evDense) < 1e-12);
    CHECK(std::abs(ev.imag()) < 1e-12);
}

TEST_CASE("apply_bilinear without extension records leakage") {
    SectoredState psi = init_state(10, 1, 0.0);
    Mat3c M = Mat3c::Zero();
    M(kDown, kUp) = 1.0;
    const SectoredState out = apply_bilinear(psi, M, false);
    CHECK(out.leakage > 0.0);
    CHECK(apply_bilinear(psi, M, true).leakage == 0.0);
}

TEST_CASE("mode rotation is unitary") {
    for (double th : {0.2, 1.0, 1.4})
        for (double ph : {0.0, 0.7, 2.5}) CHECK(ModeRotation::from_angles(th, ph).unitarity_error() < 1e-12);
}

TEST_CASE("coherent state has unit generalized squeezing") {
    const SectoredState psi = init_state(20, 10, 0.0);
    const MomentSet m = state_moments(psi);
    const CovarianceReport r = covariance_report(m, bloch_aligned_rotation(m));
    CHECK(r.xi2 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.blochLength == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(updown_squeezing(m) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(e_fraction(m) == doctest::Approx(0.0));
}

TEST_CASE("counter rng is stateless") {
    const CounterRng a(5, 2), b(5, 2), c(5, 3);
    CHECK(a.uniform(17) == b.uniform(17));
    CHECK(a.uniform(17) != c.uniform(17));
    for (std::uint64_t k = 0; k < 1000; ++k) {
        const double u = a.uniform(k);
        CHECK((u > 0.0 && u < 1.0));
    }
}

TEST_CASE("undriven state with no excitation is dark") {
    EffectiveSpinParams p;
    p.N = 12;
    p.delta = 1.0;
    Schedule s = small_schedule(12, 1);
    s.tOff = 0.0;
    const TrajectoryOutput out = evolve_trajectory(init_state(12, 6, 0.2), p, s, CounterRng(1, 0));
    CHECK(out.jumps == 0);
    CHECK(std::abs(std::abs(inner(out.final, init_state(12, 6, 0.2))) - 1.0) < 1e-12);
}

TEST_CASE("drive-off decay empties the excited state") {
    const int N = 8;
    EffectiveSpinParams p = small_params(N);
    Schedule s = small_schedule(N, 1);
    s.tOff = 0.2;
    s.tEnd = 3.0;
    const TrajectoryOutput out = evolve_trajectory(init_state(N, 4, 0.0), p, s, CounterRng(2, 0));
    CHECK(e_fraction(out.moments.back()) < 1e-3);
    CHECK(e_fraction(out.moments.back()) < e_fraction(out.moments[1]));
    CHECK(out.final.norm2() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("superradiant decay from the fully excited state") {
    const int N = 10;
    SectoredState psi(N, N, N);
    psi.sector(N)[N] = 1.0;
    EffectiveSpinParams p;
    p.N = N;
    p.delta = 0.5;
    Schedule s;
    s.tEnd = 4.0;
    s.dtBase = 1.0 / (250.0 * N);
    s.sampleEvery = 1.0;
    const TrajectoryOutput out = evolve_trajectory(psi, p, s, CounterRng(4, 0));
    CHECK(out.jumps == N);
    CHECK(std::abs(out.final.sector(N)[0]) == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& m : out.moments) CHECK(m.first(pair_index(kExc, kExc)).real() <= N + 1e-9);
}

TEST_CASE("shifted and unshifted unravelings agree") {
    const int N = 4;
    const EffectiveSpinParams p = small_params(N);
    Schedule s = small_schedule(N, 2000);
    s.dtBase = 1.0 / (2000.0 * N);
    s.sampleEvery = 0.25;
    s.dN = 2;
    s.stepper = Stepper::Midpoint;
    const EnsembleResult a = run_ensemble(p, s);
    s.unraveling = Unraveling::Unshifted;
    const EnsembleResult b = run_ensemble(p, s);
    const auto f = [](const MomentSet& m) { return m.first(pair_index(kDown, kExc)).imag(); };
    for (std::size_t k = 1; k < a.samples.size(); ++k) {
        const double se = std::hypot(jackknife_se(a.samples[k], f), jackknife_se(b.samples[k], f));
        CHECK(std::abs(f(a.samples[k].mean) - f(b.samples[k].mean)) <= 3.0 * se);
        const double sf = std::hypot(a.samples[k].eFractionSE, b.samples[k].eFractionSE);
        CHECK(std::abs(a.samples[k].eFraction - b.samples[k].eFraction) <= 3.0 * sf);
    }
}

TEST_CASE("ensemble is deterministic and thread independent") {
    const int N = 10;
    const EffectiveSpinParams p = small_params(N);
    const Schedule s = small_schedule(N, 24);
    EnsembleOptions serial;
    serial.parallel = false;
    serial.blocks = 4;
    EnsembleOptions par;
    par.threads = 2;
    par.blocks = 4;
    const EnsembleResult a = run_ensemble(p, s, serial), b = run_ensemble(p, s, par);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        CHECK(a.samples[i].eFraction == b.samples[i].eFraction);
        CHECK(a.samples[i].mean.first == b.samples[i].mean.first);
    }
    CHECK(a.totalJumps == b.totalJumps);
}

TEST_CASE("single trajectory ensemble") {
    const int N = 6;
    Schedule s = small_schedule(N, 1);
    EnsembleOptions o;
    o.blocks = 1;
    const EnsembleResult r = run_ensemble(small_params(N), s, o);
    CHECK(r.nTraj == 1);
    CHECK(std::isfinite(r.samples.back().report.xi2));
}

TEST_CASE("schedule validation") {
    Schedule s = small_schedule(10, 1);
    s.dtBase = 1.0;
    CHECK_THROWS(s.validate(10, 1.0));
    s = small_schedule(10, 1);
    s.tOff = 2.0;
    CHECK_THROWS(s.validate(10, 1.0));
}

} // TEST_SUITE
