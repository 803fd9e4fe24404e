#include "berry/coherence.hpp"
#include "berry/errors.hpp"
#include "berry/io.hpp"

#include <cmath>

namespace berry {

namespace {

void rates(int N_J, int N_Jprime, int k, double& w, double& W) {
    const double a = double(N_J - k + 1) * k, b = double(N_Jprime - k + 1) * k;
    w = std::sqrt(a * b);
    W = 0.5 * (a + b);
}

void check_ladder(int N_J, int N_Jprime, int nEmax) {
    if (N_J < 0 || N_Jprime < 0 || nEmax < 0) throw DomainError("negative occupation");
    if (nEmax > std::min(N_J, N_Jprime)) throw DomainError("n_e exceeds the sector size");
}

} // namespace

CoherenceLadder CoherenceLadder::make(int N_J, int N_Jprime, std::vector<cplx> coherences, int nUp, int nUpPrime) {
    if (coherences.empty()) throw DomainError("empty ladder");
    const int nE = int(coherences.size()) - 1;
    check_ladder(N_J, N_Jprime, nE);
    CoherenceLadder l{N_J, N_Jprime, nUp, nUpPrime, std::move(coherences), {}, {}};
    l.w.assign(nE + 1, 0.0);
    l.W.assign(nE + 1, 0.0);
    for (int k = 1; k <= nE; ++k) rates(N_J, N_Jprime, k, l.w[k], l.W[k]);
    return l;
}

std::vector<double> beta_coefficients(int N_J, int N_Jprime, int nEmax) {
    check_ladder(N_J, N_Jprime, nEmax);
    std::vector<double> beta(nEmax + 1, 1.0);
    for (int k = 1; k <= nEmax; ++k) {
        double w, W;
        rates(N_J, N_Jprime, k, w, W);
        beta[k] = w / W;
    }
    return beta;
}

Survival survival_fraction(int N_J, int N_Jprime, int nE) {
    const auto beta = beta_coefficients(N_J, N_Jprime, nE);
    double lg = 0.0;
    for (int k = 1; k <= nE; ++k) lg += std::log(beta[k]);
    Survival s;
    s.exact = std::exp(lg);
    const double d = N_J - N_Jprime;
    s.approx = nE == 0 ? 1.0 : 1.0 - nE * d * d / (8.0 * N_J * (N_J - nE));
    s.difference = s.exact - s.approx;
    return s;
}

double survival_error_bound(int N_J, int N_Jprime, int nE) {
    const double d = N_J - N_Jprime;
    return 10.0 * d * d * d * d * nE / (double(N_J) * N_J * N_J);
}

std::vector<double> left_null_vector(const CoherenceLadder& l) {
    std::vector<double> u(l.nEmax() + 1, 1.0);
    double lg = 0.0;
    for (int k = 1; k <= l.nEmax(); ++k) {
        lg += std::log(l.w[k] / l.W[k]);
        u[k] = std::exp(lg);
    }
    return u;
}

RateEquationResult evolve_rate_equation(const CoherenceLadder& l, double tEnd, double Gamma, int nOut) {
    if (!(tEnd >= 0.0) || nOut < 1) throw InvalidParameter("invalid rate-equation horizon");
    const int n = l.nEmax();
    RateEquationResult r;
    const auto u = left_null_vector(l);
    for (int k = 0; k <= n; ++k) r.asymptote += u[k] * l.coherences[k];
    r.orthonormality = std::abs(u[0] * 1.0 - 1.0);

    // State ordered from n_e = nEmax down to 0.
    CVec x(n + 1);
    for (int k = 0; k <= n; ++k) x[n - k] = l.coherences[k];
    auto rhs = [&](const CVec& y, CVec& dy, double) {
        for (int k = 0; k <= n; ++k) {
            cplx v = -l.W[k] * y[n - k];
            if (k < n) v += l.w[k + 1] * y[n - k - 1];
            dy[n - k] = Gamma * v;
        }
    };
    r.times = tEnd > 0.0 ? uniform_times(0.0, tEnd, tEnd / nOut) : std::vector<double>{0.0};
    integrate_to_times(rhs, x, r.times, [&](const CVec& y, double) { r.c0.push_back(y[n]); });
    r.final.resize(n + 1);
    for (int k = 0; k <= n; ++k) r.final[k] = x[n - k];
    return r;
}

std::string coherence_csv(int N_J, int N_Jprime, int nEmax) {
    const auto l = CoherenceLadder::make(N_J, N_Jprime, std::vector<cplx>(nEmax + 1, 0.0));
    const auto u = left_null_vector(l);
    Csv csv({"n_e", "w", "W", "beta", "cumulative_survival"});
    for (int k = 0; k <= nEmax; ++k)
        csv.row({double(k), l.w[k], l.W[k], k == 0 ? 1.0 : l.w[k] / l.W[k], u[k]});
    return csv.str();
}

} // namespace berry
