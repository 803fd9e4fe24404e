#pragma once

#include "berry/ode.hpp"

#include <string>
#include <vector>

namespace berry {

// Coherences |N_J - n_e, nUp, n_e><N_J' - n_e, nUp', n_e| for n_e = 0..nEmax.
// w[k], W[k] are the geometric and arithmetic means of the ket and bra decay
// rates (Gamma units) at k excitations; w[0] = W[0] = 0.
struct CoherenceLadder {
    int N_J = 0;
    int N_Jprime = 0;
    int nUp = 0;
    int nUpPrime = 0;
    std::vector<cplx> coherences;
    std::vector<double> w;
    std::vector<double> W;

    static CoherenceLadder make(int N_J, int N_Jprime, std::vector<cplx> coherences, int nUp = 0, int nUpPrime = 0);
    int nEmax() const { return int(coherences.size()) - 1; }
};

// beta[k] = w[k] / W[k] for k = 1..nEmax; beta[0] = 1.
std::vector<double> beta_coefficients(int N_J, int N_Jprime, int nEmax);

struct Survival {
    double exact = 1.0;
    double approx = 1.0;
    double difference = 0.0;
};

Survival survival_fraction(int N_J, int N_Jprime, int nE);

// Calibrated bound on |exact - approx| / exact.
double survival_error_bound(int N_J, int N_Jprime, int nE);

struct RateEquationResult {
    std::vector<double> times;
    std::vector<cplx> c0;
    std::vector<cplx> final;
    cplx asymptote{0.0, 0.0};
    double orthonormality = 0.0; // |u_0 . v_0 - 1|
};

// Left null vector u_0 = (1, beta_1, beta_1 beta_2, ...) indexed by n_e.
std::vector<double> left_null_vector(const CoherenceLadder& l);

RateEquationResult evolve_rate_equation(const CoherenceLadder& l, double tEnd, double Gamma = 1.0, int nOut = 200);

std::string coherence_csv(int N_J, int N_Jprime, int nEmax);

} // namespace berry
